#pragma once

#include "nlvar/dynamics.hpp"
#include "nlvar/gjrt.hpp"
#include "nlvar/jsr.hpp"
#include "nlvar/longrun.hpp"
#include "nlvar/membership.hpp"
#include "nlvar/model.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nlvar::io {

using nlohmann::json;

/// Model files:
///   {"type": "linear", "p": 2, "k": 1, "c": [...], "phi": [Phi_0, ..., Phi_k]}
///   {"type": "threshold", ..., "a": [...], "tau": [...],
///    "pieces": [[{"offset": [...], "matrix": [[...]]}, ...per regime], ...per lag]}
///   {"type": "conic", ..., "basis": [a_1, ..., a_p], "regimes": L,
///    "regime_of_cone": [...2^p entries], "matrices": [[M, ...per regime], ...per lag]}
///   {"type": "smoothed", ..., "sigma": s, "base": {"a", "tau", "pieces"}}
/// Matrices are arrays of rows. Regime indices are 0-based. Errors are
/// SchemaError carrying the JSON path of the offending value.
ModelSpec model_from_json(const json& j);
json model_to_json(const ModelSpec& model);

json read_json_file(const std::string& path);
ModelSpec load_model(const std::string& path);

Mat matrix_from_json(const json& j, const std::string& path);
Vec vector_from_json(const json& j, const std::string& path);
json to_json(const Mat& m);
json to_json(const Vec& v);

json to_json(const JsrBracket& b);
json to_json(const MembershipReport& report);

/// {"alpha_inner", "alpha_outer", "beta", "magnitudes" | "grid": {"from", "to", "count"},
///  "horizon", "tol"}.
TransitoryConfig transitory_from_json(const json& j);

/// {"matrices": [M, ...]} or a bare array of matrices.
std::vector<Mat> matrices_from_json(const json& j);

/// 17 significant digits, C locale.
std::string format_double(double x);

struct CsvTable {
  std::vector<std::string> header;
  Mat rows;
};

/// Blank lines and lines starting with '#' are skipped. A first line with a
/// non-numeric field is taken as the header. Throws InputError on ragged or
/// malformed rows.
CsvTable read_csv(const std::string& path);
CsvTable parse_csv(std::istream& in, const std::string& name);

/// comment, when set, becomes a leading "# ..." line.
void write_csv(std::ostream& out, const std::vector<std::string>& header, const Mat& rows,
               const std::optional<std::string>& comment = std::nullopt);
void write_csv_file(const std::string& path, const std::vector<std::string>& header, const Mat& rows,
                    const std::optional<std::string>& comment = std::nullopt);

/// Path CSV: t, z_1..z_p, u_1..u_p, with rows t = 1-k..0 holding the initial
/// window (zero shocks).
CsvTable path_table(const PathResult& path);
PathResult path_from_table(const CsvTable& table, int p, int k);

/// Decomposition CSV: t, psi_1..q, theta_1..r, xi_1..m, residual.
CsvTable decomposition_table(const GjrtDecomposition& d, const MembershipReport& report);

std::vector<std::string> numbered(const std::string& stem, int n);

}  // namespace nlvar::io
