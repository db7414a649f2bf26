#ifndef VEER_GEOMETRY_HPP
#define VEER_GEOMETRY_HPP

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "veer/triangulation.hpp"

namespace veer {

using cx = std::complex<double>;

// Signed volume of an ideal tetrahedron with edge parameter z (Bloch-Wigner
// dilogarithm; antisymmetric under conjugation).
double tet_volume(cx z, double eps_z = 1e-9);

// Lobachevsky function (pi-periodic, odd).
double lobachevsky(double theta);

struct ShapeAssignment {
  std::vector<cx> z;  // one parameter per tetrahedron (pair 0 edges)
};

enum class TetClass { positive, flat, negative };

struct GeometrySolution {
  ShapeAssignment shapes;
  double residual = 0.0;          // log-form Newton residual, sup norm
  double product_residual = 0.0;  // independent product-form certificate
  std::vector<TetClass> classes;
  double volume = 0.0;
  int negative_count = 0;
  int flat_count = 0;
  bool geometric() const { return negative_count == 0 && flat_count == 0; }
};

struct Filling {
  bool filled = false;
  long p = 0, q = 0;
};

// One log-linear equation: sum of coeff[t][pair] * Log(param) plus
// pi_extra * (i*pi) equals base + 2*pi*i*k for the branch integer k fixed
// from the seed.
struct Equation {
  std::vector<std::array<int, 3>> coeff;
  int pi_extra = 0;
  cx base;            // 2*pi*i for edge and surgery equations, 0 for completeness
  std::string label;
};

struct GluingSystem {
  const IdealTriangulation* tri = nullptr;
  std::vector<int> tet_sign;                  // +1/-1 orientation per tet
  std::vector<Equation> equations;            // edge equations first, then cusp rows
  int num_edge_equations = 0;
  int num_cusps = 0;
  std::vector<std::string> cusp_equation_kind;  // per cusp: "complete" or "surgery p q"
};

// Builds edge consistency equations plus one completeness or Dehn-surgery
// equation per cusp. fillings may be empty (all cusps complete) or one entry
// per cusp. Non-coprime (p,q) is rejected.
GluingSystem gluing_system(const IdealTriangulation& tri, const std::vector<Filling>& fillings = {});

// Damped Gauss-Newton on the log equations from the given seed (empty seed:
// all z = i). Deterministic. Throws on non-convergence or a singular step.
GeometrySolution solve_shapes(const GluingSystem& system, const ShapeAssignment& seed = {},
                              double eps_solve = 1e-12, double eps_z = 1e-9, int max_iter = 120);

double volume(const ShapeAssignment& shapes, double eps_z = 1e-9);

struct PachnerResult {
  IdealTriangulation tri;
  ShapeAssignment shapes;
};

// 2-3 move at the face (tet, face); the three new tetrahedra take shapes from
// the bilinear relations. Requires the face to join two distinct tetrahedra
// and all new shapes non-degenerate.
PachnerResult pachner23(const IdealTriangulation& tri, const ShapeAssignment& shapes, int tet,
                        int face, double eps_z = 1e-9);

// 3-2 move at the given edge class (degree 3, three distinct tetrahedra).
PachnerResult pachner32(const IdealTriangulation& tri, const ShapeAssignment& shapes,
                        int edge_class, double eps_z = 1e-9);

struct EvidenceReport {
  GeometrySolution solution;
  bool nongeometric_solution = false;   // some Im z < -eps_z
  bool inconclusive_flat = false;       // flat tetrahedra present
  bool witness_found = false;           // all-positive triangulation reached
  std::vector<std::string> move_path;   // e.g. "2-3 tet 4 face 2"
  double witness_volume = 0.0;
  std::string summary;
};

// Solves the complete structure; when the solution is non-geometric searches
// (bounded best-first over 2-3/3-2 moves) for an all-positive solution of the
// same algebraic volume. Numerical evidence only.
EvidenceReport nongeometric_evidence(const IdealTriangulation& tri, int depth_limit = 4,
                                     double eps_z = 1e-9);

struct ScanPoint {
  long p = 0, q = 0;
  std::string status;  // "positive", "negative-present", "flat", "failed"
  double volume = 0.0;
  double min_im = 0.0;
};

// Classifies Dehn-surgery solutions over a coprime (p,q) grid on one cusp.
std::vector<ScanPoint> surgery_scan(const IdealTriangulation& tri, int cusp, long p_min, long p_max,
                                    long q_min, long q_max);

std::string scan_csv(const std::vector<ScanPoint>& grid);

}  // namespace veer

#endif
