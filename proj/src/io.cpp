#include "tsi/io.hpp"

#include <cstdio>
#include <fstream>
#include <initializer_list>

#include <json.hpp>

namespace tsi {

namespace {

using nlohmann::json;

json parse_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), errc::io_error, "cannot open '" + path + "' for reading");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        fail(errc::parse_error, "in '" + path + "': " + e.what());
    }
    return j;
}

void write_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    require(out.good(), errc::io_error, "cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
    require(out.good(), errc::io_error, "failed writing '" + path + "'");
}

/* Strictness: every object's keys must come from its allowlist. */
void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
    require(obj.is_object(), errc::parse_error, where + " must be an object");
    for (const auto& [key, val] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        require(ok, errc::parse_error, "unknown key '" + key + "' in " + where);
    }
}

double get_number(const json& j, const std::string& where) {
    require(j.is_number(), errc::parse_error, where + " must be a number");
    return j.get<double>();
}

int get_int(const json& j, const std::string& where) {
    require(j.is_number_integer(), errc::parse_error,
            where + " must be an integer");
    return j.get<int>();
}

vec2 get_vec2(const json& j, const std::string& where) {
    require(j.is_array() && j.size() == 2, errc::parse_error,
            where + " must be a 2-element array");
    return {get_number(j[0], where + "[0]"), get_number(j[1], where + "[1]")};
}

json vec2_to_json(const vec2& v) { return json::array({v.x, v.y}); }

std::map<ipair, double> get_coeffs(const json& j, const std::string& where) {
    require(j.is_array(), errc::parse_error,
            where + " must be an array of [p, q, value] triples");
    std::map<ipair, double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string at = where + "[" + std::to_string(i) + "]";
        const json& row = j[i];
        require(row.is_array() && row.size() == 3, errc::parse_error,
                at + " must be a [p, q, value] triple");
        const ipair idx{get_int(row[0], at + "[0]"), get_int(row[1], at + "[1]")};
        require(out.find(idx) == out.end(), errc::parse_error,
                at + " repeats index (" + std::to_string(idx.p) + "," +
                    std::to_string(idx.q) + ")");
        out[idx] = get_number(row[2], at + "[2]");
    }
    return out;
}

json coeffs_to_json(const std::map<ipair, double>& coeffs) {
    json arr = json::array();
    for (const auto& [idx, c] : coeffs) arr.push_back(json::array({idx.p, idx.q, c}));
    return arr;
}

lattice get_lattice(const json& j) {
    check_keys(j, {"e1", "e2"}, "lattice");
    require(j.contains("e1") && j.contains("e2"), errc::parse_error,
            "lattice needs e1 and e2");
    return make_lattice(get_vec2(j["e1"], "lattice.e1"),
                        get_vec2(j["e2"], "lattice.e2"));
}

json lattice_to_json(const lattice& lat) {
    return json{{"e1", vec2_to_json(lat.e1)}, {"e2", vec2_to_json(lat.e2)}};
}

std::vector<double> get_number_list(const json& j, const std::string& where) {
    require(j.is_array(), errc::parse_error, where + " must be an array");
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(get_number(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

}  // namespace

problem_spec load_problem(const std::string& path) {
    const json j = parse_file(path);
    check_keys(j, {"lattice", "field_b", "potential_v", "a0", "config"}, "problem");
    require(j.contains("lattice") && j.contains("field_b"), errc::parse_error,
            "problem needs at least 'lattice' and 'field_b'");
    const lattice lat = get_lattice(j["lattice"]);

    problem_spec ps;
    ps.b = make_field(lat, get_coeffs(j["field_b"], "field_b"));
    ps.v = make_field(lat, j.contains("potential_v")
                               ? get_coeffs(j["potential_v"], "potential_v")
                               : std::map<ipair, double>{});
    ps.a0 = j.contains("a0") ? get_vec2(j["a0"], "a0") : vec2{0.0, 0.0};

    if (j.contains("config")) {
        const json& c = j["config"];
        check_keys(c,
                   {"cutoff", "kmax", "y_grid", "cell_grid", "line_intervals",
                    "bpart_s", "bpart_sigma", "cosine_floor", "length_radius",
                    "cosine_radius", "b_tol", "v_tol"},
                   "config");
        problem_config& pc = ps.config;
        if (c.contains("cutoff")) pc.cutoff = get_int(c["cutoff"], "config.cutoff");
        if (c.contains("kmax")) pc.kmax = get_int(c["kmax"], "config.kmax");
        if (c.contains("y_grid"))
            pc.quad.y_grid = get_int(c["y_grid"], "config.y_grid");
        if (c.contains("cell_grid"))
            pc.quad.cell_grid = get_int(c["cell_grid"], "config.cell_grid");
        if (c.contains("line_intervals"))
            pc.quad.line_intervals =
                get_int(c["line_intervals"], "config.line_intervals");
        if (c.contains("bpart_s"))
            pc.quad.bpart_s = get_int(c["bpart_s"], "config.bpart_s");
        if (c.contains("bpart_sigma"))
            pc.quad.bpart_sigma = get_int(c["bpart_sigma"], "config.bpart_sigma");
        if (c.contains("cosine_floor"))
            pc.cosine_floor = get_number(c["cosine_floor"], "config.cosine_floor");
        if (c.contains("length_radius"))
            pc.length_radius =
                get_number(c["length_radius"], "config.length_radius");
        if (c.contains("cosine_radius"))
            pc.cosine_radius =
                get_number(c["cosine_radius"], "config.cosine_radius");
        if (c.contains("b_tol")) pc.b_tol = get_number(c["b_tol"], "config.b_tol");
        if (c.contains("v_tol")) pc.v_tol = get_number(c["v_tol"], "config.v_tol");
    }
    return ps;
}

void save_problem(const problem_spec& ps, const std::string& path) {
    const problem_config& pc = ps.config;
    json j{{"lattice", lattice_to_json(ps.b.lat)},
           {"field_b", coeffs_to_json(ps.b.coeffs)},
           {"potential_v", coeffs_to_json(ps.v.coeffs)},
           {"a0", vec2_to_json(ps.a0)},
           {"config",
            json{{"cutoff", pc.cutoff},
                 {"kmax", pc.kmax},
                 {"y_grid", pc.quad.y_grid},
                 {"cell_grid", pc.quad.cell_grid},
                 {"line_intervals", pc.quad.line_intervals},
                 {"bpart_s", pc.quad.bpart_s},
                 {"bpart_sigma", pc.quad.bpart_sigma},
                 {"cosine_floor", pc.cosine_floor},
                 {"length_radius", pc.length_radius},
                 {"cosine_radius", pc.cosine_radius},
                 {"b_tol", pc.b_tol},
                 {"v_tol", pc.v_tol}}}};
    write_file(path, j);
}

void save_table(const invariant_table& table, const std::string& path) {
    json entries = json::array();
    for (const auto& [didx, col] : table.entries) {
        json leading = json::array(), subleading = json::array(),
             flagged = json::array();
        for (const invariant_entry& e : col) {
            leading.push_back(e.leading);
            subleading.push_back(e.subleading);
            flagged.push_back(e.flagged);
        }
        entries.push_back(json{{"direction", json::array({didx.p, didx.q})},
                               {"leading", leading},
                               {"subleading", subleading},
                               {"flagged", flagged}});
    }
    const json j{{"lattice", lattice_to_json(table.lat)},
                 {"c0", table.c0},
                 {"kmax", table.kmax},
                 {"entries", entries}};
    write_file(path, j);
}

invariant_table load_table(const std::string& path) {
    const json j = parse_file(path);
    check_keys(j, {"lattice", "c0", "kmax", "entries"}, "table");
    require(j.contains("lattice") && j.contains("c0") && j.contains("kmax") &&
                j.contains("entries"),
            errc::parse_error, "table needs lattice, c0, kmax, entries");
    invariant_table table;
    table.lat = get_lattice(j["lattice"]);
    table.c0 = get_number(j["c0"], "table.c0");
    table.kmax = get_int(j["kmax"], "table.kmax");
    require(j["entries"].is_array(), errc::parse_error,
            "table.entries must be an array");
    for (std::size_t i = 0; i < j["entries"].size(); ++i) {
        const std::string at = "entries[" + std::to_string(i) + "]";
        const json& row = j["entries"][i];
        check_keys(row, {"direction", "leading", "subleading", "flagged"}, at);
        require(row.contains("direction") && row.contains("leading") &&
                    row.contains("subleading"),
                errc::parse_error, at + " needs direction, leading, subleading");
        const json& d = row["direction"];
        require(d.is_array() && d.size() == 2, errc::parse_error,
                at + ".direction must be [m, n]");
        const ipair didx{get_int(d[0], at + ".direction[0]"),
                         get_int(d[1], at + ".direction[1]")};
        const auto lead = get_number_list(row["leading"], at + ".leading");
        const auto sub = get_number_list(row["subleading"], at + ".subleading");
        require(lead.size() == sub.size() && int(lead.size()) == table.kmax,
                errc::parse_error, at + " column lengths must equal kmax");
        std::vector<bool> flags(lead.size(), false);
        if (row.contains("flagged")) {
            const json& f = row["flagged"];
            require(f.is_array() && f.size() == lead.size(), errc::parse_error,
                    at + ".flagged must align with the columns");
            for (std::size_t k = 0; k < f.size(); ++k) {
                require(f[k].is_boolean(), errc::parse_error,
                        at + ".flagged entries must be booleans");
                flags[k] = f[k].get<bool>();
            }
        }
        std::vector<invariant_entry> col(lead.size());
        for (std::size_t k = 0; k < lead.size(); ++k)
            col[k] = {lead[k], sub[k], flags[k]};
        require(table.entries.find(didx) == table.entries.end(),
                errc::parse_error, at + " repeats a direction");
        table.entries[didx] = std::move(col);
    }
    return table;
}

void save_cosines(const cosine_data& cd, const std::string& path) {
    json values = json::array();
    for (const auto& [didx, col] : cd.values)
        values.push_back(json{{"direction", json::array({didx.p, didx.q})},
                              {"cosines", col}});
    write_file(path, json{{"floor", cd.floor}, {"values", values}});
}

cosine_data load_cosines(const std::string& path) {
    const json j = parse_file(path);
    check_keys(j, {"floor", "values"}, "cosines");
    require(j.contains("values"), errc::parse_error, "cosines needs 'values'");
    cosine_data cd;
    if (j.contains("floor")) cd.floor = get_number(j["floor"], "cosines.floor");
    require(j["values"].is_array(), errc::parse_error,
            "cosines.values must be an array");
    for (std::size_t i = 0; i < j["values"].size(); ++i) {
        const std::string at = "values[" + std::to_string(i) + "]";
        const json& row = j["values"][i];
        check_keys(row, {"direction", "cosines"}, at);
        require(row.contains("direction") && row.contains("cosines"),
                errc::parse_error, at + " needs direction and cosines");
        const json& d = row["direction"];
        require(d.is_array() && d.size() == 2, errc::parse_error,
                at + ".direction must be [m, n]");
        const ipair didx{get_int(d[0], at + ".direction[0]"),
                         get_int(d[1], at + ".direction[1]")};
        require(cd.values.find(didx) == cd.values.end(), errc::parse_error,
                at + " repeats a direction");
        cd.values[didx] = get_number_list(row["cosines"], at + ".cosines");
    }
    return cd;
}

void write_field_csv(const scalar_field& f, int grid, const std::string& path) {
    require(grid >= 2, errc::invalid_argument, "field grid must be at least 2");
    std::ofstream out(path);
    require(out.good(), errc::io_error, "cannot open '" + path + "' for writing");
    out << "i,j,x,y,value\n";
    char buf[128];
    for (int i = 0; i < grid; ++i)
        for (int jj = 0; jj < grid; ++jj) {
            const vec2 x = f.lat.e1 * (double(i) / grid) +
                           f.lat.e2 * (double(jj) / grid);
            std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g\n", i, jj,
                          x.x, x.y, f.eval(x));
            out << buf;
        }
    require(out.good(), errc::io_error, "failed writing '" + path + "'");
}

void write_curve_csv(const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows,
                     const std::string& path) {
    std::ofstream out(path);
    require(out.good(), errc::io_error, "cannot open '" + path + "' for writing");
    for (std::size_t i = 0; i < header.size(); ++i)
        out << (i ? "," : "") << header[i];
    out << '\n';
    char buf[64];
    for (const auto& row : rows) {
        require(row.size() == header.size(), errc::invalid_argument,
                "csv row width must match the header");
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", row[i]);
            out << (i ? "," : "") << buf;
        }
        out << '\n';
    }
    require(out.good(), errc::io_error, "failed writing '" + path + "'");
}

}  // namespace tsi
