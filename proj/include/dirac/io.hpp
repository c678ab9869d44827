#pragma once

#include "dirac/accelerant.hpp"
#include "dirac/pipeline.hpp"
#include "dirac/potential.hpp"
#include "dirac/riesz.hpp"
#include "dirac/spectral_data.hpp"
#include "dirac/validator.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace dirac::io {

// All writers emit a fixed field order and 17-significant-digit floats, so a
// given input and configuration always serializes to identical bytes.
inline std::string format_real(double v) {
    if (v == 0.0) v = 0.0;  // canonicalize -0: JSON readers drop the sign anyway
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline std::string pair_json(std::complex<double> z) {
    return "[" + format_real(z.real()) + "," + format_real(z.imag()) + "]";
}

/// Row-major [re, im] pairs of a matrix, as one JSON array.
inline std::string matrix_json(const CMat<double>& a) {
    std::string out = "[";
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j) {
            if (i + j > 0) out += ",";
            out += pair_json(a(i, j));
        }
    out += "]";
    return out;
}

template <class Seq, class Fn>
std::string join_lines(const Seq& seq, const char* indent, Fn&& fn) {
    std::string out;
    bool first = true;
    for (const auto& item : seq) {
        out += first ? "\n" : ",\n";
        out += indent;
        out += fn(item);
        first = false;
    }
    out += "\n";
    return out;
}

// ---- JSON out ----------------------------------------------------------------

inline std::string to_json(const PotentialGrid<double>& q) {
    std::string out = "{\n";
    out += "  \"r\": " + std::to_string(q.r) + ",\n";
    out += "  \"m\": " + std::to_string(q.m) + ",\n";
    out += "  \"p\": " + format_real(q.p) + ",\n";
    out += "  \"values\": [";
    out += join_lines(q.values, "    ", [](const CMat<double>& v) { return matrix_json(v); });
    out += "  ]\n}\n";
    return out;
}

inline std::string to_json(const SpectralData<double>& d) {
    std::string out = "{\n";
    out += "  \"r\": " + std::to_string(d.r) + ",\n";
    out += "  \"data\": [";
    out += join_lines(d.data, "    ", [](const SpectralDatum<double>& e) {
        return "{\"lambda\": " + format_real(e.lambda) + ", \"alpha\": " + matrix_json(e.alpha) +
               "}";
    });
    out += "  ]\n}\n";
    return out;
}

inline std::string to_json(const AccelerantGrid<double>& h) {
    std::string out = "{\n";
    out += "  \"r\": " + std::to_string(h.r) + ",\n";
    out += "  \"k\": " + std::to_string(h.k) + ",\n";
    out += "  \"p\": " + format_real(h.p) + ",\n";
    out += "  \"values\": [";
    out += join_lines(h.values, "    ", [](const CMat<double>& v) { return matrix_json(v); });
    out += "  ]\n}\n";
    return out;
}

inline std::string real_array_json(const std::vector<double>& v) {
    std::string out = "[";
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += format_real(v[i]);
    }
    out += "]";
    return out;
}

inline std::string to_json(const ConditionReport<double>& r) {
    std::string out = "{\n";
    out += "  \"n_min\": " + std::to_string(r.n_min) + ",\n";
    out += "  \"b1_lambda_tail\": " + real_array_json(r.b1_lambda_tail) + ",\n";
    out += "  \"b1_alpha_tail\": " + real_array_json(r.b1_alpha_tail) + ",\n";
    out += "  \"b1_lambda_trend\": " + format_real(r.b1_lambda_trend) + ",\n";
    out += "  \"b1_alpha_trend\": " + format_real(r.b1_alpha_trend) + ",\n";
    out += "  \"b2_ok\": " + std::string(r.b2_ok ? "true" : "false") + ",\n";
    out += "  \"b2_total\": " + std::to_string(r.b2_total) + ",\n";
    out += "  \"b2_expected\": " + std::to_string(r.b2_expected) + ",\n";
    out += "  \"b2_window_ranks\": [";
    out += join_lines(r.b2_window_ranks, "    ", [](const std::pair<int, int>& w) {
        return "[" + std::to_string(w.first) + "," + std::to_string(w.second) + "]";
    });
    out += "  ],\n";
    out += "  \"b3_min_singular\": " + format_real(r.b3_min_singular) + ",\n";
    out += "  \"b4_h_norm\": " + format_real(r.b4_h_norm) + ",\n";
    out += "  \"b4_tail\": " + format_real(r.b4_tail) + ",\n";
    out += "  \"b4_last_increment\": " + format_real(r.b4_last_increment) + "\n}\n";
    return out;
}

inline std::string to_json(const KadecReport<double>& r) {
    std::string out = "{\n";
    out += "  \"n_min\": " + std::to_string(r.n_min) + ",\n";
    out += "  \"n_max\": " + std::to_string(r.n_max) + ",\n";
    out += "  \"delta\": " + format_real(r.delta) + ",\n";
    out += "  \"b_bound\": " + format_real(r.b_bound) + ",\n";
    out += "  \"r0_ok\": " + std::string(r.r0_ok ? "true" : "false") + ",\n";
    out += "  \"r1_ok\": " + std::string(r.r1_ok ? "true" : "false") + ",\n";
    out += "  \"perturbation\": " + format_real(r.perturbation) + ",\n";
    out += "  \"violations\": [";
    for (size_t i = 0; i < r.violations.size(); ++i)
        out += (i ? "," : "") + std::to_string(r.violations[i]);
    out += "],\n";
    out += "  \"quad_partial_sums\": " + real_array_json(r.quad_partial_sums) + ",\n";
    out += "  \"quad_trend\": " + format_real(r.quad_trend) + ",\n";
    out += "  \"quad_diverging\": " + std::string(r.quad_diverging ? "true" : "false") + ",\n";
    out += "  \"windows\": [";
    out += join_lines(r.windows, "    ", [](const KadecWindow<double>& w) {
        return "{\"n\": " + std::to_string(w.n) + ", \"rank_total\": " +
               std::to_string(w.rank_total) + ", \"spanning\": " +
               (w.spanning ? "true" : "false") + ", \"deviation\": " + format_real(w.deviation) +
               ", \"basis_norm\": " + format_real(w.basis_norm) + ", \"basis_inv_norm\": " +
               format_real(w.basis_inv_norm) + ", \"quad_contribution\": " +
               format_real(w.quad_contribution) + "}";
    });
    out += "  ]\n}\n";
    return out;
}

inline std::string to_json(const RoundTripReport<double>& r) {
    std::string out = "{\n";
    out += "  \"potential_error\": " + format_real(r.potential_error) + ",\n";
    out += "  \"relative_potential_error\": " + format_real(r.relative_potential_error) + ",\n";
    out += "  \"lambda_error\": " + format_real(r.lambda_error) + ",\n";
    out += "  \"alpha_error\": " + format_real(r.alpha_error) + ",\n";
    out += "  \"kernel\": \"" + std::string(to_string(r.kernel)) + "\",\n";
    out += "  \"config\": {\"N\": " + std::to_string(r.N) + ", \"terms\": " +
           std::to_string(r.n_terms) + ", \"m\": " + std::to_string(r.m) + ", \"k\": " +
           std::to_string(r.k) + ", \"p\": " + format_real(r.p) + "}\n}\n";
    return out;
}

inline std::string to_json(const AccelerantCheck<double>& c) {
    std::string out = "{\n";
    out += "  \"accelerant\": " + std::string(c.accelerant ? "true" : "false") + ",\n";
    out += "  \"min_eigenvalue\": " + format_real(c.min_eigenvalue) + ",\n";
    out += "  \"symmetry_defect\": " + format_real(c.symmetry) + ",\n";
    out += "  \"section_lengths\": " + real_array_json(c.section_lengths) + ",\n";
    out += "  \"profile\": " + real_array_json(c.profile) + "\n}\n";
    return out;
}

// ---- JSON in -----------------------------------------------------------------

namespace detail {

inline nlohmann::json parse(const std::string& text, const std::string& what) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("io", what + ": " + e.what());
    }
}

inline CMat<double> matrix_from(const nlohmann::json& arr, Index r, const std::string& what) {
    if (!arr.is_array() || static_cast<Index>(arr.size()) != r * r)
        throw ValidationError("io", what + ": expected " + std::to_string(r * r) +
                                        " [re, im] pairs");
    CMat<double> m(r, r);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < r; ++j) {
            const auto& cell = arr[static_cast<size_t>(i * r + j)];
            if (!cell.is_array() || cell.size() != 2)
                throw ValidationError("io", what + ": entries must be [re, im]");
            m(i, j) = Complex<double>(cell[0].get<double>(), cell[1].get<double>());
        }
    return m;
}

}  // namespace detail

inline PotentialGrid<double> potential_from_json(const std::string& text) {
    nlohmann::json j = detail::parse(text, "potential");
    PotentialGrid<double> q;
    try {
        q.r = j.at("r").get<Index>();
        q.m = j.at("m").get<Index>();
        q.p = j.at("p").get<double>();
        const auto& values = j.at("values");
        if (!values.is_array())
            throw ValidationError("io", "potential: values must be an array");
        for (const auto& v : values)
            q.values.push_back(detail::matrix_from(v, q.r, "potential value"));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("io", std::string("potential: ") + e.what());
    }
    q.validate();
    return q;
}

inline SpectralData<double> spectral_from_json(const std::string& text) {
    nlohmann::json j = detail::parse(text, "spectral data");
    try {
        Index r = j.at("r").get<Index>();
        std::vector<std::pair<double, CMat<double>>> raw;
        for (const auto& e : j.at("data"))
            raw.emplace_back(e.at("lambda").get<double>(),
                             detail::matrix_from(e.at("alpha"), r, "alpha"));
        return SpectralData<double>::ingest(r, std::move(raw));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("io", std::string("spectral data: ") + e.what());
    }
}

inline AccelerantGrid<double> accelerant_from_json(const std::string& text) {
    nlohmann::json j = detail::parse(text, "kernel grid");
    AccelerantGrid<double> h;
    try {
        h.r = j.at("r").get<Index>();
        h.k = j.at("k").get<Index>();
        h.p = j.at("p").get<double>();
        for (const auto& v : j.at("values"))
            h.values.push_back(detail::matrix_from(v, h.r, "kernel value"));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("io", std::string("kernel grid: ") + e.what());
    }
    h.validate();
    return h;
}

// ---- CSV ----------------------------------------------------------------------

namespace detail {

inline std::string entry_header(Index r) {
    std::string head;
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < r; ++j)
            head += ",re_" + std::to_string(i) + "_" + std::to_string(j) + ",im_" +
                    std::to_string(i) + "_" + std::to_string(j);
    return head;
}

inline std::string entry_row(const CMat<double>& v) {
    std::string row;
    for (Index i = 0; i < v.rows(); ++i)
        for (Index j = 0; j < v.cols(); ++j)
            row += "," + format_real(v(i, j).real()) + "," + format_real(v(i, j).imag());
    return row;
}

}  // namespace detail

inline std::string to_csv(const PotentialGrid<double>& q) {
    std::string out = "x" + detail::entry_header(q.r) + "\n";
    for (Index i = 0; i <= q.m; ++i)
        out += format_real(q.node(i)) + detail::entry_row(q.values[i]) + "\n";
    return out;
}

inline std::string to_csv(const AccelerantGrid<double>& h) {
    std::string out = "x" + detail::entry_header(h.r) + "\n";
    for (Index i = 0; i <= 2 * h.k; ++i)
        out += format_real(h.node(i)) + detail::entry_row(h.values[i]) + "\n";
    return out;
}

inline std::string tails_csv(const ConditionReport<double>& r) {
    std::string out = "n,lambda_tail,alpha_tail\n";
    for (size_t i = 0; i < r.b1_lambda_tail.size(); ++i)
        out += std::to_string(r.n_min + static_cast<int>(i)) + "," +
               format_real(r.b1_lambda_tail[i]) + "," + format_real(r.b1_alpha_tail[i]) + "\n";
    return out;
}

// ---- files ---------------------------------------------------------------------

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("io", "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("io", "cannot write " + path);
    out << content;
    if (!out) throw ValidationError("io", "short write to " + path);
}

}  // namespace dirac::io
