#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "clarklab/model.hpp"

namespace clarklab {

// Largest singular value.
double operator_norm(const Eigen::MatrixXcd& m);

// A linear map between model spaces, stored in Clark coordinates.  dom/cod
// may be null for maps on abstract coordinate spaces (L^2 of a measure).
struct OperatorMatrix {
  Eigen::MatrixXcd mat;
  SpacePtr dom;
  SpacePtr cod;

  ModelVector apply(const ModelVector& f) const;
  double norm() const { return operator_norm(mat); }
};

// Compression of multiplication by z: diag(zeta) - s r^T with s_k = sqrt(w_k)
// and r_k = sqrt(w_k) zeta_k.
OperatorMatrix compressed_shift(SpacePtr space);

// U_c = S + c (., conj(z) theta) 1, unitary for |c| = 1; U_1 is diag(zeta).
OperatorMatrix clark_unitary(SpacePtr space, const UnitPoint& c);

// T = S + (., conj(z) theta) u.
OperatorMatrix rank_one_perturbation(SpacePtr space, const ModelVector& u);

// How far T = S + (., conj(z) theta) u is from an isometry, and whether u
// places it in the Clark family u = c * 1 with |c| = 1.
struct IsometryClass {
  double defect = 0.0;         // ||T* T - I||
  double co_defect = 0.0;      // ||T T* - I||
  bool isometric = false;
  bool unitary = false;
  cplx clark_parameter{0.0, 0.0};
  bool in_clark_family = false;
};
IsometryClass isometry_classification(SpacePtr space, const ModelVector& u,
                                      double tol = 1e-10);

// T = diag + u v^*; the resolvent is applied through the diagonal part with a
// single rank-one correction.
struct RankOneData {
  Eigen::VectorXcd diag;
  Eigen::VectorXcd u;
  Eigen::VectorXcd v;

  Eigen::MatrixXcd dense() const;
};
RankOneData rank_one_data(SpacePtr space, const ModelVector& u);
Eigen::VectorXcd rank_one_resolvent(const RankOneData& t, cplx lambda,
                                    const Eigen::VectorXcd& b);

// Compression f -> P_cod(psi f) of multiplication between two model spaces.
OperatorMatrix att_operator(SpacePtr dom, SpacePtr cod, const BoundaryFn& psi,
                            int quad = 0);

// att_operator plus certificates that psi actually multiplies dom into cod:
// membership_residual is the largest distance of psi e_j from cod.
struct MultiplierOp {
  OperatorMatrix op;
  double membership_residual = 0.0;
  cplx g1_0{0.0, 0.0};  // (op* chibar_cod, chibar_dom)
};
MultiplierOp multiplier_operator(SpacePtr dom, SpacePtr cod,
                                 const BoundaryFn& g, int quad = 0);

// Reads the multiplier symbol back off an intertwiner: if X U_c = T X with
// T = S_cod + (., conj(z) omega) u and X* conj(z) omega = beta conj(z) theta,
// then X multiplies by g = conj(beta) (u - omega) / (c - theta).  The symbol
// is assembled as a pole-free rational function by deflating the zeros of
// c - theta (the c level set of theta) out of the numerator.
struct RecoveredMultiplier {
  cplx beta{0.0, 0.0};
  double hypothesis_residual = 0.0;  // ||X* chibar_cod - beta chibar_dom||
  BoundaryFn g;
  Eigen::VectorXcd g_at_cod_clark;
  double deflation_residual = 0.0;
  MultiplierOp rebuilt;
  double defect = 0.0;  // ||X - M_g||
};
RecoveredMultiplier multiplier_from_intertwiner(const OperatorMatrix& X,
                                                const OperatorMatrix& T,
                                                const UnitPoint& c = UnitPoint(),
                                                int quad = 0);

// The reverse direction: from a symbol g to the rank-one perturbation T on
// cod intertwined with U_c on dom through M_g.
struct PerturbationFromMultiplier {
  MultiplierOp X;
  cplx g1_0{0.0, 0.0};
  ModelVector u;
  OperatorMatrix T;
  double membership_residual = 0.0;    // formula for u vs cod
  double value_mismatch = 0.0;         // atom values of u vs the formula
  double intertwining_residual = 0.0;  // ||X U_c - T X||
};
PerturbationFromMultiplier perturbation_from_multiplier(SpacePtr dom,
                                                        SpacePtr cod,
                                                        const BoundaryFn& g,
                                                        const UnitPoint& c,
                                                        int quad = 0);

// Symbol with an explicit inner-outer split: g = outer * prod of Blaschke
// factors over inner_zeros (a zero at 0 contributes the factor z).
struct FactoredSymbol {
  std::vector<cplx> inner_zeros;
  BoundaryFn outer;

  cplx eval(cplx z) const;
  BoundaryFn fn() const;
};

// Orthonormal basis of the model space of the Blaschke product with the
// given zeros (no constraint at the origin), as boundary functions.
std::vector<BoundaryFn> takenaka_basis(const std::vector<cplx>& zeros);

// Kernel and closed-range structure of att_operator(dom, cod, g) for a
// factored symbol: with alpha = gcd of the inner part of g and cod's inner
// function and beta = cod/alpha, the kernel is dom  ^ beta H^2 and the range
// closure is alpha K_beta.
struct AttStructure {
  std::vector<cplx> alpha_zeros;
  std::vector<cplx> beta_zeros;
  int kernel_dim_predicted = 0;      // max(0, dim dom - deg beta)
  int kernel_dim = 0;                // dim dom - rank of the cross Gram
  Eigen::MatrixXcd kernel_basis;     // columns, coords in dom
  double kernel_residual = 0.0;      // max ||A v|| over the basis
  Eigen::MatrixXcd cross_gram;       // (e_i^dom, tm_j^beta)
  double range_residual = 0.0;       // max dist of alpha tm_j from ran A
  bool closure_rank_match = false;   // rank(cross_gram) == deg beta
};
AttStructure att_structure(SpacePtr dom, SpacePtr cod, const FactoredSymbol& g,
                           int quad = 0);

// For outer g with 1/g bounded, the inverse of A_g : dom -> cod is the att
// operator with symbol 1/g in the opposite direction.
struct AttInverse {
  OperatorMatrix inverse;
  double left_residual = 0.0;   // ||inv X - I||
  double right_residual = 0.0;  // ||X inv - I||
};
AttInverse att_inverse(const OperatorMatrix& X, const BoundaryFn& one_over_g,
                       int quad = 0);

// Cross Gram of the Clark bases of two model spaces; invertibility of the
// compression P_cod restricted to dom.  A sup distance below 1 between the
// inner functions forces invertibility.
struct DirectSumCheck {
  Eigen::MatrixXcd cross_gram;
  bool dims_equal = false;
  double sigma_min = 0.0;
  double condition = 0.0;
  double sup_dist = 0.0;
  bool invertible = false;
  bool distance_criterion = false;  // sup_dist < 1
};
DirectSumCheck direct_sum_check(SpacePtr a, SpacePtr b, int quad = 0);

// Arnoldi with full reorthogonalization.
struct KrylovDecomposition {
  Eigen::MatrixXcd basis;  // n x k, orthonormal columns
  Eigen::MatrixXcd hess;   // (k+1) x k when stopped early, k x k when full
  int dim = 0;
  double breakdown = 0.0;             // last subdiagonal entry
  double compression_residual = 0.0;  // ||basis^H T basis - hess_top||
  double span_residual = 0.0;         // rank agreement with the raw powers
};
KrylovDecomposition krylov_decompose(const Eigen::MatrixXcd& t,
                                     const Eigen::VectorXcd& b,
                                     double tol = 1e-10);

struct Cyclicity {
  int krylov_dim = 0;
  bool cyclic = false;
  double smallest_sv = 0.0;  // of the raw Krylov matrix
};
Cyclicity cyclicity_check(const Eigen::MatrixXcd& t, const Eigen::VectorXcd& b);

// Conjugates T = M_z + (., psi) phi on L^2(nu), intertwined with M_z on
// L^2(mu) by Y, into the canonical pair: probability measures nu1, mu1, the
// perturbation T1 = M_z + (., conj(z)) phi1, and X with X* conj(z) = conj(z)
// exactly.  All matrices act on orthonormal coordinates sqrt(weight) * value.
struct NormalizedPair {
  AtomicMeasure nu1;
  AtomicMeasure mu1;
  Eigen::VectorXcd phi1;  // values on the atoms of nu1
  Eigen::MatrixXcd t1;
  Eigen::MatrixXcd x;
  double a1 = 0.0;
  double a2 = 0.0;
  double chibar_residual = 0.0;
  double form_residual = 0.0;          // T1 vs its rank-one normal form
  double intertwining_residual = 0.0;  // ||X U_mu1 - T1 X||
};
NormalizedPair normalize_intertwining(const AtomicMeasure& nu,
                                      const Eigen::VectorXcd& phi_vals,
                                      const Eigen::VectorXcd& psi_vals,
                                      const AtomicMeasure& mu,
                                      const Eigen::MatrixXcd& y);

// Orders coordinates so T = diag(v_diag) + u v^* becomes block upper
// triangular (V1 | T1 | V2) with V1, V2 diagonal unitaries and T1 again a
// diagonal-plus-rank-one with nowhere vanishing data.  nu carries the T1
// eigenvalue cluster points with unit weights.
struct TriangularBlocks {
  Eigen::MatrixXcd basis;
  int dim_v1 = 0;
  int dim_t1 = 0;
  int dim_v2 = 0;
  Eigen::VectorXcd v1_diag;
  Eigen::VectorXcd v2_diag;
  Eigen::MatrixXcd t1;
  std::optional<AtomicMeasure> nu;  // absent when the middle block is empty
  Eigen::VectorXd phi;   // > 0 entrywise
  Eigen::VectorXcd psi;  // nonvanishing entrywise
  double triangular_residual = 0.0;
  double reducing_residual = 0.0;
};
TriangularBlocks triangularize_reductive(const Eigen::VectorXcd& v_diag,
                                         const Eigen::VectorXcd& u,
                                         const Eigen::VectorXcd& v,
                                         double cluster_tol = 1e-8,
                                         double zero_tol = 1e-10);

}  // namespace clarklab
