#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "mesh.hpp"
#include "reconstruct.hpp"
#include "types.hpp"
#include "wavepacket.hpp"

namespace photonic::io {

using json = nlohmann::json;

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw input_error("cannot write " + path.string());
    out << text;
    if (!out) throw input_error("failed writing " + path.string());
}

inline json parse_json(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw input_error(origin + ": invalid JSON (" + e.what() + ")");
    }
}

inline json read_json(const std::filesystem::path& path) { return parse_json(read_text(path), path.string()); }

// Shortest decimal text that parses back to the same double.
inline std::string format_double(double x) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

inline std::string format_fixed(double x, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

inline std::string format_significant(double x, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

inline std::string format_complex(complex z, int digits = 12) {
    std::string s = format_significant(z.real(), digits);
    const double im = z.imag();
    s += (std::signbit(im) ? "-" : "+") + format_significant(std::abs(im), digits) + "i";
    return s;
}

template <class F>
auto json_field(const std::string& origin, F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw input_error(origin + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Matrices

inline cmatrix unitary_from_json(const json& j, const std::string& origin = "matrix") {
    return json_field(origin, [&] {
        const json& rows = j.is_object() ? j.at("matrix") : j;
        if (!rows.is_array() || rows.empty()) throw input_error(origin + ": matrix must be a non-empty list of rows");
        const auto r = static_cast<index_t>(rows.size());
        const auto c = static_cast<index_t>(rows[0].size());
        cmatrix M(r, c);
        for (index_t a = 0; a < r; ++a) {
            const json& row = rows[static_cast<std::size_t>(a)];
            if (!row.is_array() || static_cast<index_t>(row.size()) != c)
                throw input_error(origin + ": row " + std::to_string(a + 1) + " has the wrong length");
            for (index_t b = 0; b < c; ++b) {
                const json& e = row[static_cast<std::size_t>(b)];
                if (e.is_number()) {
                    M(a, b) = e.get<double>();
                } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
                    M(a, b) = complex(e[0].get<double>(), e[1].get<double>());
                } else {
                    throw input_error(origin + ": entry (" + std::to_string(a + 1) + "," + std::to_string(b + 1) +
                                      ") must be a number or [re, im]");
                }
            }
        }
        return M;
    });
}

inline json unitary_to_json(const cmatrix& M) {
    json rows = json::array();
    for (index_t a = 0; a < M.rows(); ++a) {
        json row = json::array();
        for (index_t b = 0; b < M.cols(); ++b) row.push_back({M(a, b).real(), M(a, b).imag()});
        rows.push_back(row);
    }
    return rows;
}

inline cmatrix read_matrix(const std::filesystem::path& path) { return unitary_from_json(read_json(path), path.string()); }

// ---------------------------------------------------------------------------
// Meshes

inline InterferometerMesh mesh_from_json(const json& j, const std::string& origin = "mesh") {
    return json_field(origin, [&] {
        InterferometerMesh mesh;
        mesh.m = j.at("m").get<int>();
        const json& els = j.at("elements");
        if (!els.is_array()) throw input_error(origin + ": elements must be a list");
        for (std::size_t k = 0; k < els.size(); ++k) {
            const json& e = els[k];
            const std::string type = e.at("type").get<std::string>();
            if (type == "bs") {
                mesh.elements.push_back(BeamSplitter{e.at("a").get<int>(), e.at("b").get<int>(), e.at("beta").get<double>()});
            } else if (type == "ps") {
                mesh.elements.push_back(PhaseShifter{e.at("mode").get<int>(), e.at("alpha").get<double>()});
            } else {
                throw input_error(origin + ": element " + std::to_string(k + 1) + " has unknown type '" + type + "'");
            }
        }
        try {
            mesh.validate();
        } catch (const input_error& e) {
            throw input_error(origin + ": " + e.what());
        }
        return mesh;
    });
}

inline json mesh_to_json(const InterferometerMesh& mesh) {
    json els = json::array();
    for (const auto& e : mesh.elements) {
        if (const auto* bs = std::get_if<BeamSplitter>(&e)) {
            els.push_back({{"type", "bs"}, {"a", bs->a}, {"b", bs->b}, {"beta", bs->beta}});
        } else {
            const auto& ps = std::get<PhaseShifter>(e);
            els.push_back({{"type", "ps"}, {"mode", ps.mode}, {"alpha", ps.alpha}});
        }
    }
    return {{"m", mesh.m}, {"elements", els}};
}

inline InterferometerMesh read_mesh(const std::filesystem::path& path) { return mesh_from_json(read_json(path), path.string()); }

// ---------------------------------------------------------------------------
// Photons

inline GaussianPhoton photon_from_json(const json& j, const std::string& origin = "photon") {
    return json_field(origin, [&] {
        const double tau = j.contains("tau_fs") ? j.at("tau_fs").get<double>() : 0.0;
        return GaussianPhoton::from_wavelength(j.at("lambda_c_nm").get<double>(), j.at("fwhm_nm").get<double>(), tau);
    });
}

// ---------------------------------------------------------------------------
// CSV

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    for (auto& f : out) {
        const auto a = f.find_first_not_of(" \t");
        const auto b = f.find_last_not_of(" \t");
        f = a == std::string::npos ? std::string() : f.substr(a, b - a + 1);
    }
    return out;
}

inline double parse_number(const std::string& field, const std::string& where) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (!field.empty() && *first == '+') ++first;
    auto r = std::from_chars(first, last, v);
    if (field.empty() || r.ec != std::errc() || r.ptr != last) throw input_error(where + ": '" + field + "' is not a number");
    return v;
}

inline int parse_int(const std::string& field, const std::string& where) {
    int v = 0;
    auto r = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || r.ec != std::errc() || r.ptr != field.data() + field.size())
        throw input_error(where + ": '" + field + "' is not an integer");
    return v;
}

struct CsvLine {
    int number = 0;
    std::vector<std::string> fields;
};

struct CsvDocument {
    std::map<std::string, std::string> header; // "# key: value" lines
    std::vector<std::string> columns;
    std::vector<CsvLine> rows;
};

inline CsvDocument parse_csv(const std::string& text, const std::string& origin) {
    CsvDocument doc;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (line[0] == '#') {
            const auto colon = line.find(':');
            if (colon != std::string::npos) {
                auto key = split_csv(line.substr(1, colon - 1))[0];
                auto value = line.substr(colon + 1);
                const auto a = value.find_first_not_of(" \t");
                doc.header[key] = a == std::string::npos ? "" : value.substr(a);
            }
            continue;
        }
        auto fields = split_csv(line);
        if (doc.columns.empty()) {
            doc.columns = fields;
            continue;
        }
        if (fields.size() != doc.columns.size())
            throw input_error(origin + ": row " + std::to_string(number) + " has " + std::to_string(fields.size()) +
                              " fields, expected " + std::to_string(doc.columns.size()));
        doc.rows.push_back({number, std::move(fields)});
    }
    if (doc.columns.empty()) throw input_error(origin + ": missing CSV column header");
    return doc;
}

inline std::size_t column_index(const CsvDocument& doc, const std::string& name, const std::string& origin) {
    for (std::size_t k = 0; k < doc.columns.size(); ++k)
        if (doc.columns[k] == name) return k;
    throw input_error(origin + ": missing column '" + name + "'");
}

inline std::vector<VisibilityDatum> parse_visibilities(const std::string& text, const std::string& origin) {
    const auto doc = parse_csv(text, origin);
    const std::size_t ci = column_index(doc, "i", origin), cj = column_index(doc, "j", origin),
                      ck = column_index(doc, "k", origin), cl = column_index(doc, "l", origin),
                      cv = column_index(doc, "V", origin), cs = column_index(doc, "sigma", origin);
    std::vector<VisibilityDatum> out;
    for (const auto& row : doc.rows) {
        const std::string where = origin + ": row " + std::to_string(row.number);
        VisibilityDatum d;
        d.i = parse_int(row.fields[ci], where);
        d.j = parse_int(row.fields[cj], where);
        d.k = parse_int(row.fields[ck], where);
        d.l = parse_int(row.fields[cl], where);
        d.value = parse_number(row.fields[cv], where);
        d.sigma = parse_number(row.fields[cs], where);
        if (!(d.i < d.j) || !(d.k < d.l) || d.i < 1 || d.k < 1) throw input_error(where + ": pairs must satisfy 1<=i<j, 1<=k<l");
        if (!std::isfinite(d.value) || std::isnan(d.sigma) || d.sigma <= 0.0)
            throw input_error(where + ": visibility must be finite and sigma positive");
        out.push_back(d);
    }
    return out;
}

inline std::vector<VisibilityDatum> read_visibilities(const std::filesystem::path& path) {
    return parse_visibilities(read_text(path), path.string());
}

inline std::string visibilities_to_csv(const std::vector<VisibilityDatum>& data) {
    std::string s = "i,j,k,l,V,sigma\n";
    for (const auto& d : data)
        s += std::to_string(d.i) + "," + std::to_string(d.j) + "," + std::to_string(d.k) + "," + std::to_string(d.l) + "," +
             format_double(d.value) + "," + format_double(d.sigma) + "\n";
    return s;
}

inline VisibilityScan parse_scan(const std::string& text, const std::string& origin) {
    const auto doc = parse_csv(text, origin);
    auto header = [&](const std::string& key) -> const std::string& {
        auto it = doc.header.find(key);
        if (it == doc.header.end()) throw input_error(origin + ": missing header '# " + key + ": ...'");
        return it->second;
    };
    auto header_number = [&](const std::string& key, double fallback) {
        auto it = doc.header.find(key);
        return it == doc.header.end() ? fallback : parse_number(it->second, origin + ": header " + key);
    };
    VisibilityScan scan;
    scan.i = parse_int(header("i"), origin + ": header i");
    scan.j = parse_int(header("j"), origin + ": header j");
    scan.k = parse_int(header("k"), origin + ": header k");
    scan.l = parse_int(header("l"), origin + ": header l");
    scan.ho1 = header_number("ho1", 0.0);
    scan.ho2 = header_number("ho2", 0.0);
    scan.dark = header_number("dark", 0.0);
    try {
        scan.photon1 = GaussianPhoton::from_wavelength(parse_number(header("lambda1_nm"), origin + ": header lambda1_nm"),
                                                       parse_number(header("fwhm1_nm"), origin + ": header fwhm1_nm"));
        scan.photon2 = GaussianPhoton::from_wavelength(parse_number(header("lambda2_nm"), origin + ": header lambda2_nm"),
                                                       parse_number(header("fwhm2_nm"), origin + ": header fwhm2_nm"));
    } catch (const input_error& e) {
        throw input_error(origin + ": " + e.what());
    }
    const std::size_t cd = column_index(doc, "delay_fs", origin), cc = column_index(doc, "counts", origin),
                      ce = column_index(doc, "error", origin);
    for (const auto& row : doc.rows) {
        const std::string where = origin + ": row " + std::to_string(row.number);
        ScanSample s{parse_number(row.fields[cd], where), parse_number(row.fields[cc], where),
                     parse_number(row.fields[ce], where)};
        if (!std::isfinite(s.delay) || !std::isfinite(s.counts) || s.counts < 0.0)
            throw input_error(where + ": delay and counts must be finite, counts non-negative");
        if (!std::isfinite(s.error) || s.error <= 0.0) throw input_error(where + ": error must be positive");
        scan.samples.push_back(s);
    }
    scan.validate();
    return scan;
}

inline VisibilityScan read_scan(const std::filesystem::path& path) { return parse_scan(read_text(path), path.string()); }

inline double photon_wavelength_nm(const GaussianPhoton& p) { return 2.0 * pi * speed_of_light_nm_per_fs / p.omega_c; }

inline double photon_fwhm_nm(const GaussianPhoton& p) {
    const double lambda = photon_wavelength_nm(p);
    return p.sigma * 2.0 * std::sqrt(2.0 * std::log(2.0)) * lambda * lambda / (2.0 * pi * speed_of_light_nm_per_fs);
}

inline std::string scan_to_csv(const VisibilityScan& scan) {
    std::string s;
    auto head = [&](const std::string& k, const std::string& v) { s += "# " + k + ": " + v + "\n"; };
    head("i", std::to_string(scan.i));
    head("j", std::to_string(scan.j));
    head("k", std::to_string(scan.k));
    head("l", std::to_string(scan.l));
    head("ho1", format_double(scan.ho1));
    head("ho2", format_double(scan.ho2));
    head("dark", format_double(scan.dark));
    head("lambda1_nm", format_double(photon_wavelength_nm(scan.photon1)));
    head("fwhm1_nm", format_double(photon_fwhm_nm(scan.photon1)));
    head("lambda2_nm", format_double(photon_wavelength_nm(scan.photon2)));
    head("fwhm2_nm", format_double(photon_fwhm_nm(scan.photon2)));
    s += "delay_fs,counts,error\n";
    for (const auto& x : scan.samples)
        s += format_double(x.delay) + "," + format_double(x.counts) + "," + format_double(x.error) + "\n";
    return s;
}

} // namespace photonic::io
