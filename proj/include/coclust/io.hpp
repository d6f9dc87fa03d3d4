#pragma once

#include "coclust/bem.hpp"
#include "coclust/errors.hpp"
#include "coclust/types.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace coclust::io {

using Json = nlohmann::ordered_json;

/// Shortest form that keeps 17 significant digits.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    if (trim(line).empty())
        return out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

inline bool parse_number(std::string_view s, double& out) {
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

inline std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError(path, 0, 0, "cannot open file");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
        lines.push_back(line);
    return lines;
}

} // namespace detail

/// Headerless CSV of 0/1 integers, one row per individual.
inline BinaryMatrix read_binary_csv(const std::string& path) {
    const auto lines = detail::read_lines(path);
    if (lines.empty())
        throw ParseError(path, 1, 1, "empty file");
    const Index n = static_cast<Index>(lines.size());
    Index m = -1;
    Matrix values;
    for (Index i = 0; i < n; ++i) {
        const auto fields = detail::split(lines[static_cast<std::size_t>(i)]);
        if (fields.empty())
            throw ParseError(path, static_cast<std::size_t>(i + 1), 1, "empty line");
        if (m < 0) {
            m = static_cast<Index>(fields.size());
            values.resize(n, m);
        } else if (static_cast<Index>(fields.size()) != m) {
            throw ParseError(path, static_cast<std::size_t>(i + 1), fields.size(),
                             "expected " + std::to_string(m) + " fields");
        }
        for (Index j = 0; j < m; ++j) {
            const auto f = fields[static_cast<std::size_t>(j)];
            if (f == "0" || f == "1") {
                values(i, j) = f == "1" ? 1.0 : 0.0;
                continue;
            }
            double v = 0.0;
            if (detail::parse_number(f, v))
                throw NonBinaryValue(static_cast<std::size_t>(i),
                                     static_cast<std::size_t>(j), std::string(f));
            throw ParseError(path, static_cast<std::size_t>(i + 1),
                             static_cast<std::size_t>(j + 1),
                             "not a number: '" + std::string(f) + "'");
        }
    }
    return BinaryMatrix(std::move(values));
}

/// Headerless CSV with p numeric columns per individual. Blank lines are
/// rows with p = 0.
inline CovariateTable read_covariate_csv(const std::string& path) {
    const auto lines = detail::read_lines(path);
    if (lines.empty())
        throw ParseError(path, 1, 1, "empty file");
    const Index n = static_cast<Index>(lines.size());
    Index p = -1;
    Matrix values;
    for (Index i = 0; i < n; ++i) {
        const auto fields = detail::split(lines[static_cast<std::size_t>(i)]);
        if (p < 0) {
            p = static_cast<Index>(fields.size());
            values.resize(n, p);
        } else if (static_cast<Index>(fields.size()) != p) {
            throw ParseError(path, static_cast<std::size_t>(i + 1), fields.size(),
                             "expected " + std::to_string(p) + " fields");
        }
        for (Index a = 0; a < p; ++a) {
            double v = 0.0;
            const auto f = fields[static_cast<std::size_t>(a)];
            if (!detail::parse_number(f, v) || !std::isfinite(v))
                throw ParseError(path, static_cast<std::size_t>(i + 1),
                                 static_cast<std::size_t>(a + 1),
                                 "not a finite number: '" + std::string(f) + "'");
            values(i, a) = v;
        }
    }
    return CovariateTable(std::move(values));
}

struct Dataset {
    BinaryMatrix x;
    CovariateTable y;
};

/// Loads x and (optionally) y; an empty y_path means no co-variables.
inline Dataset load_dataset(const std::string& x_path, const std::string& y_path) {
    BinaryMatrix x = read_binary_csv(x_path);
    CovariateTable y = y_path.empty() ? CovariateTable::intercept_only(x.rows())
                                      : read_covariate_csv(y_path);
    if (y.rows() != x.rows())
        throw DimensionMismatch("x has " + std::to_string(x.rows()) +
                                " rows but y has " + std::to_string(y.rows()));
    return {std::move(x), std::move(y)};
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path);
    out << text;
}

inline std::string binary_csv(const BinaryMatrix& x) {
    std::string s;
    s.reserve(static_cast<std::size_t>(x.rows() * x.cols() * 2));
    for (Index i = 0; i < x.rows(); ++i) {
        for (Index j = 0; j < x.cols(); ++j) {
            if (j)
                s += ',';
            s += x(i, j) == 1.0 ? '1' : '0';
        }
        s += '\n';
    }
    return s;
}

inline std::string covariate_csv(const CovariateTable& y) {
    std::string s;
    for (Index i = 0; i < y.rows(); ++i) {
        for (Index a = 0; a < y.dim(); ++a) {
            if (a)
                s += ',';
            s += format_double(y.raw()(i, a));
        }
        s += '\n';
    }
    return s;
}

/// "axis,index,label" with 1-based indices and labels.
inline std::string labels_csv(const HardLabels& labels) {
    std::string s = "axis,index,label\n";
    for (std::size_t i = 0; i < labels.z.size(); ++i)
        s += "row," + std::to_string(i + 1) + "," + std::to_string(labels.z[i] + 1) + "\n";
    for (std::size_t j = 0; j < labels.w.size(); ++j)
        s += "col," + std::to_string(j + 1) + "," + std::to_string(labels.w[j] + 1) + "\n";
    return s;
}

inline HardLabels parse_labels_csv(const std::string& path) {
    const auto lines = detail::read_lines(path);
    HardLabels out;
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        const auto f = detail::split(lines[ln]);
        double idx = 0, lab = 0;
        if (f.size() != 3 || !detail::parse_number(f[1], idx) ||
            !detail::parse_number(f[2], lab))
            throw ParseError(path, ln + 1, 1, "expected axis,index,label");
        auto& target = f[0] == "row" ? out.z : out.w;
        if (f[0] != "row" && f[0] != "col")
            throw ParseError(path, ln + 1, 1, "axis must be row or col");
        if (static_cast<std::size_t>(idx) != target.size() + 1)
            throw ParseError(path, ln + 1, 2, "indices must be consecutive");
        target.push_back(static_cast<int>(lab) - 1);
    }
    return out;
}

inline std::string free_energy_csv(const std::vector<double>& trace) {
    std::string s = "iteration,value\n";
    for (std::size_t c = 0; c < trace.size(); ++c)
        s += std::to_string(c) + "," + format_double(trace[c]) + "\n";
    return s;
}

inline Json params_to_json(const ModelParams& th) {
    Json j;
    j["g"] = th.g();
    j["d"] = th.d();
    j["p"] = th.p();
    j["pi"] = std::vector<double>(th.pi.data(), th.pi.data() + th.pi.size());
    j["rho"] = std::vector<double>(th.rho.data(), th.rho.data() + th.rho.size());
    Json beta = Json::array();
    for (int k = 0; k < th.g(); ++k) {
        Json row = Json::array();
        for (int l = 0; l < th.d(); ++l) {
            const Vector& b = th.beta(k, l);
            row.push_back(std::vector<double>(b.data(), b.data() + b.size()));
        }
        beta.push_back(std::move(row));
    }
    j["beta"] = std::move(beta);
    Json mu = Json::array(), sigma = Json::array();
    for (const auto& c : th.gaussians) {
        mu.push_back(std::vector<double>(c.mean().data(), c.mean().data() + c.dim()));
        Json rows = Json::array();
        for (Index a = 0; a < c.dim(); ++a) {
            std::vector<double> r(static_cast<std::size_t>(c.dim()));
            for (Index b = 0; b < c.dim(); ++b)
                r[static_cast<std::size_t>(b)] = c.covariance()(a, b);
            rows.push_back(std::move(r));
        }
        sigma.push_back(std::move(rows));
    }
    j["mu"] = std::move(mu);
    j["sigma"] = std::move(sigma);
    return j;
}

/// Parses and validates theta; every failure is a ParamValidationError.
inline ModelParams params_from_json(const Json& j) {
    try {
        ModelParams th;
        const auto pi = j.at("pi").get<std::vector<double>>();
        const auto rho = j.at("rho").get<std::vector<double>>();
        th.pi = Eigen::Map<const Vector>(pi.data(), static_cast<Index>(pi.size()));
        th.rho = Eigen::Map<const Vector>(rho.data(), static_cast<Index>(rho.size()));
        const int g = static_cast<int>(pi.size()), d = static_cast<int>(rho.size());
        const auto& mu = j.at("mu");
        const auto& sigma = j.at("sigma");
        if (static_cast<int>(mu.size()) != g || static_cast<int>(sigma.size()) != g)
            throw ParamValidationError("mu and sigma need one entry per row cluster");
        for (int k = 0; k < g; ++k) {
            const auto m = mu[static_cast<std::size_t>(k)].get<std::vector<double>>();
            const Index p = static_cast<Index>(m.size());
            const auto& s = sigma[static_cast<std::size_t>(k)];
            if (static_cast<Index>(s.size()) != p)
                throw ParamValidationError("sigma must be p x p");
            Matrix cov(p, p);
            for (Index a = 0; a < p; ++a) {
                const auto row = s[static_cast<std::size_t>(a)].get<std::vector<double>>();
                if (static_cast<Index>(row.size()) != p)
                    throw ParamValidationError("sigma must be p x p");
                for (Index b = 0; b < p; ++b)
                    cov(a, b) = row[static_cast<std::size_t>(b)];
            }
            try {
                th.gaussians.emplace_back(
                    Eigen::Map<const Vector>(m.data(), p), std::move(cov));
            } catch (const Error& e) {
                throw ParamValidationError("sigma[" + std::to_string(k + 1) +
                                           "]: " + e.what());
            }
        }
        const auto& beta = j.at("beta");
        if (static_cast<int>(beta.size()) != g)
            throw ParamValidationError("beta must have g rows");
        th.beta = BetaBlocks(g, d, th.p() + 1);
        for (int k = 0; k < g; ++k) {
            if (static_cast<int>(beta[static_cast<std::size_t>(k)].size()) != d)
                throw ParamValidationError("beta must have d columns");
            for (int l = 0; l < d; ++l) {
                const auto b = beta[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)]
                                   .get<std::vector<double>>();
                if (static_cast<Index>(b.size()) != th.p() + 1)
                    throw ParamValidationError("beta blocks must have length p+1");
                th.beta(k, l) = Eigen::Map<const Vector>(b.data(), th.p() + 1);
            }
        }
        th.validate();
        return th;
    } catch (const nlohmann::json::exception& e) {
        throw ParamValidationError(std::string("malformed parameters: ") + e.what());
    }
}

inline ModelParams read_params(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParamValidationError("cannot open " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParamValidationError(path + ": " + e.what());
    }
    return params_from_json(j);
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

} // namespace coclust::io
