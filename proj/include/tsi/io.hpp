#pragma once

#include <string>
#include <vector>

#include "tsi/reconstruct.hpp"

namespace tsi {

/* Solver knobs carried by a problem file. kmax = 0 means the cutoff-derived
 * default. The b/v tolerances are the round-trip pass thresholds. */
struct problem_config {
    int cutoff = 2;
    int kmax = 0;
    quad_config quad;
    double cosine_floor = 1e-3;
    double length_radius = 5.0;
    double cosine_radius = 6.0;
    double b_tol = 1e-6;
    double v_tol = 1e-4;

    roundtrip_config roundtrip(bool recover_class) const {
        roundtrip_config rc;
        rc.cutoff = cutoff;
        rc.kmax = kmax;
        rc.quad = quad;
        rc.recover_class = recover_class;
        rc.cosine_floor = cosine_floor;
        rc.length_radius = length_radius;
        rc.cosine_radius = cosine_radius;
        return rc;
    }
};

/* A full problem: fields over a common lattice, the constant vector, and
 * solver configuration. The lattice lives in the fields. */
struct problem_spec {
    scalar_field b;
    scalar_field v;
    vec2 a0;
    problem_config config;
};

/* Strict JSON: unknown keys anywhere are a ParseError, coefficients are
 * [p, q, value] triples, and loading runs the same constructor checks as
 * building the objects in code. */
problem_spec load_problem(const std::string& path);
void save_problem(const problem_spec& ps, const std::string& path);

void save_table(const invariant_table& table, const std::string& path);
invariant_table load_table(const std::string& path);

void save_cosines(const cosine_data& cd, const std::string& path);
cosine_data load_cosines(const std::string& path);

/* Field samples over a grid x grid subdivision of the cell, rows
 * "i,j,x,y,value" with %.17g formatting. */
void write_field_csv(const scalar_field& f, int grid, const std::string& path);

/* Generic numeric table with a header row. */
void write_curve_csv(const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows,
                     const std::string& path);

}  // namespace tsi
