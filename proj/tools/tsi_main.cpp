/* Batch front end: problem files in, tables/reports/curves out.
 *
 * Commands read a problem JSON (lattice, field/potential coefficients, a0,
 * solver config), run one stage of the pipeline, and emit JSON for
 * structured results and CSV for sampled curves.  All failures surface as a
 * one-line JSON envelope {code, message, field} on stderr with exit codes:
 *   0  success
 *   1  validation failure (bad inputs, hypothesis violations)
 *   2  numerical failure (conditioning, convergence, tolerances)
 *   3  file I/O or parse failure
 * The env var TSI_THREADS caps worker threads in the table builder.
 */
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tsi/io.hpp"
#include "tsi/spectral_oracle.hpp"

namespace {

using nlohmann::json;
using namespace tsi;

int exit_code_for(errc code) {
    switch (code) {
        case errc::io_error:
        case errc::parse_error:
            return 3;
        case errc::ill_conditioned:
        case errc::non_monotone:
        case errc::non_positive:
        case errc::convergence_failure:
        case errc::genericity_failure:
        case errc::clamp_violation:
            return 2;
        default:
            return 1;
    }
}

/* Best-effort field attribution: the first 'quoted' token in the message,
 * else the first "(p,q)" group after the word "direction". */
std::string offending_field(const std::string& msg) {
    const auto a = msg.find('\'');
    if (a != std::string::npos) {
        const auto b = msg.find('\'', a + 1);
        if (b != std::string::npos) return msg.substr(a + 1, b - a - 1);
    }
    const auto d = msg.find("direction (");
    if (d != std::string::npos) {
        const auto open = d + 10;
        const auto close = msg.find(')', open);
        if (close != std::string::npos)
            return msg.substr(open, close - open + 1);
    }
    return "";
}

void emit_error(const tsi::error& e) {
    std::string msg = e.what();
    const std::string prefix = std::string(errc_name(e.code())) + ": ";
    if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
    const json env{{"code", errc_name(e.code())},
                   {"message", msg},
                   {"field", offending_field(msg)}};
    std::cerr << env.dump() << '\n';
}

void write_report(const json& j, const std::string& out_path) {
    std::cout << j.dump(2) << '\n';
    if (out_path.empty()) return;
    std::ofstream out(out_path);
    require(out.good(), errc::io_error,
            "cannot open '" + out_path + "' for writing");
    out << j.dump(2) << '\n';
    require(out.good(), errc::io_error, "failed writing '" + out_path + "'");
}

std::vector<ipair> parse_directions(const std::string& s) {
    std::vector<ipair> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ';')) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        std::istringstream is(item);
        int m = 0, n = 0;
        char comma = 0;
        is >> m >> comma >> n;
        bool clean = bool(is) && comma == ',';
        if (clean) {
            is >> std::ws;
            clean = is.eof();
        }
        require(clean, errc::parse_error,
                "bad direction '" + item + "' (expected m,n)");
        require(m != 0 || n != 0, errc::parse_error,
                "direction (0,0) is not allowed");
        out.push_back({m, n});
    }
    require(!out.empty(), errc::parse_error, "empty direction list");
    return out;
}

json direction_json(ipair d) { return json::array({d.p, d.q}); }

/* ------------------------------------------------------------------ */

int run_validate(const std::string& spec_path, const std::string& out_path,
                 double floor_override) {
    problem_spec ps = load_problem(spec_path);
    const double floor =
        floor_override > 0.0 ? floor_override : ps.config.cosine_floor;
    const hypothesis_report rep =
        validate_problem(ps.b, ps.a0, ps.config.length_radius,
                         ps.config.cosine_radius, floor);

    const double flux = ps.b.mean() * ps.b.lat.det;
    const bool flux_ok = std::abs(flux - two_pi) <= 1e-9 * two_pi;

    json length = json::array();
    for (const auto& pr : rep.length_violations)
        length.push_back(json{{"a", direction_json(pr.a)},
                              {"b", direction_json(pr.b)},
                              {"length", pr.length}});
    json cosine = json::array();
    for (const auto& cv : rep.cosine_violations)
        cosine.push_back(
            json{{"d", direction_json(cv.d)}, {"value", cv.value}});

    const bool ok = rep.ok() && flux_ok;
    const json report{
        {"field_condition",
         json{{"b0", rep.field.b0},
              {"max_deviation", rep.field.max_deviation},
              {"margin", rep.field.margin},
              {"ok", rep.field.ok}}},
        {"flux", json{{"value", flux}, {"target", two_pi}, {"ok", flux_ok}}},
        {"length_condition",
         json{{"radius", ps.config.length_radius},
              {"violations", length},
              {"ok", rep.length_violations.empty()}}},
        {"cosine_condition",
         json{{"radius", ps.config.cosine_radius},
              {"floor", floor},
              {"violations", cosine},
              {"ok", rep.cosine_violations.empty()}}},
        {"ok", ok}};
    write_report(report, out_path);
    return ok ? 0 : 1;
}

int run_forward(const std::string& spec_path, const std::string& out_path,
                int kmax_cli, int cutoff_cli, const std::string& directions_str) {
    problem_spec ps = load_problem(spec_path);
    const int cutoff = cutoff_cli >= 1 ? cutoff_cli : ps.config.cutoff;
    const int kmax = kmax_cli >= 1   ? kmax_cli
                     : ps.config.kmax >= 1 ? ps.config.kmax
                                           : default_kmax(cutoff);
    const std::vector<ipair> directions = directions_str.empty()
                                              ? directions_for_cutoff(cutoff)
                                              : parse_directions(directions_str);
    const invariant_table table =
        build_invariant_table(ps.b, ps.v, ps.a0, directions, kmax,
                              ps.config.quad, ps.config.cosine_floor);
    save_table(table, out_path);
    std::cout << "wrote invariant table '" << out_path << "' ("
              << table.entries.size() << " directions, kmax " << table.kmax
              << ")\n";
    return 0;
}

int run_reconstruct(const std::string& table_path,
                    const std::string& cosines_path,
                    const std::string& spec_path, const std::string& out_path,
                    int cutoff, int grid, double radius, double tol) {
    require(!cosines_path.empty() || !spec_path.empty(), errc::invalid_argument,
            "reconstruct needs --cosines (gauge-class data) or --spec "
            "(known-field route)");
    const invariant_table table = load_table(table_path);
    const lattice& lat = table.lat;

    quad_config quad;
    double floor = 1e-3;
    cosine_data cosines;
    if (!cosines_path.empty()) {
        cosines = load_cosines(cosines_path);
        floor = cosines.floor;
        if (!spec_path.empty()) quad = load_problem(spec_path).config.quad;
    } else {
        // Known-field route: derive the gauge class from the table and the
        // field supplied in the problem file, then expand to cosines.
        const problem_spec ps = load_problem(spec_path);
        quad = ps.config.quad;
        floor = tol > 0.0 ? tol : ps.config.cosine_floor;
        std::vector<ipair> dirs;
        for (const auto& [didx, col] : table.entries) dirs.push_back(didx);
        const gauge_class_result gc = recover_gauge_class(
            table, ps.b, radius > 0.0 ? radius : ps.config.cosine_radius);
        cosines = direction_cosines(gc, dirs, table.kmax, floor);
    }
    if (tol > 0.0) floor = tol;

    const double b0 = two_pi / lat.det;
    std::map<ipair, directional_data> rays;
    std::map<ipair, sprime_data> densities;
    for (const auto& [didx, col] : table.entries) {
        std::vector<double> lead(col.size(), 0.0);
        std::vector<double> coss(col.size(), 0.0);
        for (int k = 1; k <= int(col.size()); ++k) {
            lead[std::size_t(k - 1)] = col[std::size_t(k - 1)].leading;
            coss[std::size_t(k - 1)] = cosines.value(didx, k);
        }
        const sprime_data sp =
            recover_sprime(lead, coss, table.c0, floor, quad.y_grid);
        const primitive_direction dir = primitive_decompose(lat, didx.p, didx.q);
        rays[didx] = recover_directional_field(sp, b0, dir, table.kmax);
        densities[didx] = sp;
    }
    const scalar_field rec_b = assemble_from_rays(lat, rays, cutoff, b0);
    const vec2 a0_real = realize_a0(cosines, lat);
    const scalar_field rec_v =
        recover_potential(table, cosines, rec_b, a0_real, cutoff, quad);

    problem_spec out;
    out.b = rec_b;
    out.v = rec_v;
    out.a0 = a0_real;
    out.config.cutoff = cutoff;
    out.config.kmax = table.kmax;
    out.config.quad = quad;
    out.config.cosine_floor = floor;
    save_problem(out, out_path);

    // Sampled curves next to the JSON: recovered fields on the cell grid and
    // the per-direction densities s'(y).
    std::string base = out_path;
    if (base.size() > 5 && base.substr(base.size() - 5) == ".json")
        base = base.substr(0, base.size() - 5);
    write_field_csv(rec_b, grid, base + "_b.csv");
    write_field_csv(rec_v, grid, base + "_v.csv");
    {
        std::vector<std::string> header{"y"};
        for (const auto& [didx, sp] : densities) {
            std::ostringstream name;
            name << "sprime_" << didx.p << "_" << didx.q;
            header.push_back(name.str());
        }
        const int n = quad.y_grid;
        std::vector<std::vector<double>> rows;
        rows.reserve(std::size_t(n));
        for (int m = 0; m < n; ++m) {
            std::vector<double> row{-0.5 + double(m) / n};
            for (const auto& [didx, sp] : densities)
                row.push_back(sp.values[std::size_t(m)]);
            rows.push_back(std::move(row));
        }
        write_curve_csv(header, rows, base + "_sprime.csv");
    }

    std::cout << "wrote recovered problem '" << out_path << "' ("
              << table.entries.size() << " directions; a0 realization ["
              << a0_real.x << ", " << a0_real.y << "])\n";
    return 0;
}

int run_gauge_class(const std::string& table_path, const std::string& spec_path,
                    const std::string& out_path, double radius) {
    const invariant_table table = load_table(table_path);
    const problem_spec ps = load_problem(spec_path);
    const double r = radius > 0.0 ? radius : ps.config.cosine_radius;
    const gauge_class_result gc = recover_gauge_class(table, ps.b, r);
    std::vector<ipair> dirs;
    for (const auto& [didx, col] : table.entries) dirs.push_back(didx);
    const cosine_data cosines =
        direction_cosines(gc, dirs, table.kmax, ps.config.cosine_floor);
    save_cosines(cosines, out_path);

    const json summary{{"basis",
                        json{{"d1", direction_json(gc.d1)},
                             {"c1", gc.c1},
                             {"s1", gc.s1},
                             {"d2", direction_json(gc.d2)},
                             {"c2", gc.c2},
                             {"s2", gc.s2}}},
                       {"radius", r},
                       {"consistency", cosine_consistency(cosines)},
                       {"out", out_path}};
    std::cout << summary.dump(2) << '\n';
    return 0;
}

std::vector<double> spectrum_for(const problem_spec& ps, int grid, int count) {
    const magnetic_potential a = make_potential(ps.b, ps.a0);
    const discrete_hamiltonian h = assemble_hamiltonian(a, ps.v, grid);
    return lowest_eigenvalues(h, count);
}

int run_spectrum(const std::string& spec_path, const std::string& out_path,
                 int grid, int count) {
    const problem_spec ps = load_problem(spec_path);
    const std::vector<double> ev = spectrum_for(ps, grid, count);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < ev.size(); ++i)
        rows.push_back({double(i), ev[i]});
    if (out_path.empty()) {
        char buf[64];
        std::cout << "index,eigenvalue\n";
        for (const auto& row : rows) {
            std::snprintf(buf, sizeof buf, "%d,%.17g", int(row[0]), row[1]);
            std::cout << buf << '\n';
        }
    } else {
        write_curve_csv({"index", "eigenvalue"}, rows, out_path);
        std::cout << "wrote " << ev.size() << " eigenvalues to '" << out_path
                  << "'\n";
    }
    return 0;
}

int run_roundtrip(const std::string& spec_path, const std::string& out_path,
                  int kmax_cli, int cutoff_cli, double tol, bool blind) {
    problem_spec ps = load_problem(spec_path);
    if (cutoff_cli >= 1) ps.config.cutoff = cutoff_cli;
    if (kmax_cli >= 1) ps.config.kmax = kmax_cli;
    if (tol > 0.0) {
        ps.config.b_tol = tol;
        ps.config.v_tol = tol;
    }
    const roundtrip_config cfg = ps.config.roundtrip(blind);
    const reconstruction_report rep = roundtrip(ps.b, ps.v, ps.a0, cfg);

    json diagnostics = json::array();
    for (const auto& [didx, diag] : rep.diagnostics)
        diagnostics.push_back(json{{"direction", direction_json(didx)},
                                   {"min_cosine", diag.min_cos},
                                   {"min_sprime", diag.min_sprime}});
    const bool ok = rep.b_error.rel_l2 <= ps.config.b_tol &&
                    rep.b_error.sup <= ps.config.b_tol &&
                    rep.v_error.rel_l2 <= ps.config.v_tol &&
                    rep.v_error.sup <= ps.config.v_tol;
    json report{{"cutoff", cfg.cutoff},
                {"kmax", cfg.kmax >= 1 ? cfg.kmax : default_kmax(cfg.cutoff)},
                {"blind", blind},
                {"b_error",
                 json{{"rel_l2", rep.b_error.rel_l2}, {"sup", rep.b_error.sup}}},
                {"v_error",
                 json{{"rel_l2", rep.v_error.rel_l2}, {"sup", rep.v_error.sup}}},
                {"tolerances",
                 json{{"b", ps.config.b_tol}, {"v", ps.config.v_tol}}},
                {"diagnostics", diagnostics},
                {"ok", ok}};
    if (rep.spot_check_err >= 0.0) report["spot_check_error"] = rep.spot_check_err;
    write_report(report, out_path);
    require(ok, errc::convergence_failure,
            "roundtrip errors exceed tolerances (B rel " +
                std::to_string(rep.b_error.rel_l2) + ", V rel " +
                std::to_string(rep.v_error.rel_l2) + ")");
    return 0;
}

int run_trace(const std::string& spec_path, const std::string& out_path,
              int grid, int count, double width, double tmax, int steps) {
    const problem_spec ps = load_problem(spec_path);
    require(tmax > 0.0 && steps >= 2, errc::invalid_argument,
            "trace needs tmax > 0 and at least 2 steps");
    const std::vector<double> ev = spectrum_for(ps, grid, count);
    std::vector<double> t_grid(std::size_t(steps) + 1, 0.0);
    for (int i = 0; i <= steps; ++i) t_grid[std::size_t(i)] = tmax * i / steps;
    const std::vector<double> tr = smoothed_wave_trace(ev, t_grid, width);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < t_grid.size(); ++i)
        rows.push_back({t_grid[i], tr[i]});
    if (out_path.empty()) {
        char buf[96];
        std::cout << "t,trace\n";
        for (const auto& row : rows) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g", row[0], row[1]);
            std::cout << buf << '\n';
        }
    } else {
        write_curve_csv({"t", "trace"}, rows, out_path);
        std::cout << "wrote " << rows.size() << " trace samples to '"
                  << out_path << "'\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Inverse spectral toolkit for periodic magnetic Schrodinger operators "
        "on 2-D tori: forward invariant tables, field/potential "
        "reconstruction, gauge-class recovery, and a finite-difference "
        "spectral cross-check.  TSI_THREADS caps worker threads."};
    app.require_subcommand(1);

    std::string spec_path, out_path, table_path, cosines_path, directions_str;
    int kmax = -1, cutoff = -1, grid = -1, count = -1, steps = 400;
    double tol = -1.0, width = 11.0, tmax = 2.0, radius = -1.0;
    bool blind = false;

    CLI::App* validate =
        app.add_subcommand("validate", "Check the reconstruction hypotheses");
    validate->add_option("--spec", spec_path, "problem JSON file")->required();
    validate->add_option("--out", out_path, "also write the report here");
    validate->add_option("--tol", tol, "cosine floor override");

    CLI::App* forward =
        app.add_subcommand("forward", "Compute the invariant table");
    forward->add_option("--spec", spec_path, "problem JSON file")->required();
    forward->add_option("--out", out_path, "table JSON output")->required();
    forward->add_option("--kmax", kmax, "orders per direction");
    forward->add_option("--cutoff", cutoff, "direction cutoff");
    forward->add_option("--directions", directions_str,
                        "explicit directions 'm,n;m,n;...'");

    CLI::App* reconstruct = app.add_subcommand(
        "reconstruct", "Recover field and potential from a table");
    reconstruct->add_option("--table", table_path, "invariant table JSON")
        ->required();
    reconstruct->add_option("--cosines", cosines_path,
                            "gauge-class cosine JSON");
    reconstruct->add_option("--spec", spec_path,
                            "problem JSON with the known field (blind route)");
    reconstruct->add_option("--out", out_path, "recovered problem JSON output")
        ->required();
    reconstruct->add_option("--cutoff", cutoff, "assembly cutoff (default 2)");
    reconstruct->add_option("--grid", grid, "field CSV sampling grid");
    reconstruct->add_option("--radius", radius, "gauge-class cosine radius");
    reconstruct->add_option("--tol", tol, "cosine floor override");

    CLI::App* gauge_class = app.add_subcommand(
        "gauge-class", "Recover the extended gauge class from table + field");
    gauge_class->add_option("--table", table_path, "invariant table JSON")
        ->required();
    gauge_class->add_option("--spec", spec_path, "problem JSON with the field")
        ->required();
    gauge_class->add_option("--out", out_path, "cosine JSON output")->required();
    gauge_class->add_option("--radius", radius, "propagation radius");

    CLI::App* spectrum = app.add_subcommand(
        "spectrum", "Lowest eigenvalues of the discretized operator");
    spectrum->add_option("--spec", spec_path, "problem JSON file")->required();
    spectrum->add_option("--out", out_path, "CSV output (stdout if omitted)");
    spectrum->add_option("--grid", grid, "sites per lattice direction");
    spectrum->add_option("--count", count, "number of eigenvalues");

    CLI::App* roundtrip_cmd = app.add_subcommand(
        "roundtrip", "Forward + reconstruct + error report against the truth");
    roundtrip_cmd->add_option("--spec", spec_path, "problem JSON file")
        ->required();
    roundtrip_cmd->add_option("--out", out_path, "also write the report here");
    roundtrip_cmd->add_option("--kmax", kmax, "orders per direction");
    roundtrip_cmd->add_option("--cutoff", cutoff, "direction cutoff");
    roundtrip_cmd->add_option("--tol", tol, "error tolerance for both fields");
    roundtrip_cmd->add_flag("--blind", blind,
                            "recover the gauge class instead of using a0");

    CLI::App* trace = app.add_subcommand(
        "trace", "Smoothed wave trace from the discretized spectrum");
    trace->add_option("--spec", spec_path, "problem JSON file")->required();
    trace->add_option("--out", out_path, "CSV output (stdout if omitted)");
    trace->add_option("--grid", grid, "sites per lattice direction");
    trace->add_option("--count", count, "number of eigenvalues");
    trace->add_option("--width", width, "frequency window width");
    trace->add_option("--tmax", tmax, "largest time sample");
    trace->add_option("--steps", steps, "time samples between 0 and tmax");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (validate->parsed()) return run_validate(spec_path, out_path, tol);
        if (forward->parsed())
            return run_forward(spec_path, out_path, kmax, cutoff,
                               directions_str);
        if (reconstruct->parsed())
            return run_reconstruct(table_path, cosines_path, spec_path,
                                   out_path, cutoff >= 1 ? cutoff : 2,
                                   grid >= 2 ? grid : 64, radius, tol);
        if (gauge_class->parsed())
            return run_gauge_class(table_path, spec_path, out_path, radius);
        if (spectrum->parsed())
            return run_spectrum(spec_path, out_path, grid >= 16 ? grid : 64,
                                count >= 1 ? count : 10);
        if (roundtrip_cmd->parsed())
            return run_roundtrip(spec_path, out_path, kmax, cutoff, tol, blind);
        if (trace->parsed())
            return run_trace(spec_path, out_path, grid >= 16 ? grid : 64,
                             count >= 1 ? count : 100, width, tmax, steps);
    } catch (const tsi::error& e) {
        emit_error(e);
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        const json env{
            {"code", "InternalError"}, {"message", e.what()}, {"field", ""}};
        std::cerr << env.dump() << '\n';
        return 2;
    }
    return 0;
}
