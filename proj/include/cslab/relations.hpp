#pragma once
#include <vector>

namespace cslab {

using IntRow = std::vector<long long>;
using IntMatrix = std::vector<IntRow>;

/// Lovasz-reduced basis of the integer lattice spanned by the rows
/// (size-reduced, Lovasz condition with parameter delta on consecutive rows,
/// same lattice up to a unimodular transform).
/// delta in (1/4, 1); throws InvalidState on linearly dependent rows.
IntMatrix lll_reduce(IntMatrix basis, double delta = 0.99);

struct RelationQuery {
    std::vector<double> v;  // d real coordinates
    double tol = 1e-9;      // residual tolerance on |q . v|
    long long bound = 100;  // max |q_i| accepted
    double scale = 0.0;     // lattice embedding scale gamma; 0 selects the default
};

/// Detection outcome. Found results always satisfy q != 0, max|q_i| <= bound
/// and |q . v| <= tol (re-checked on return). A NoneFound result carries the
/// coefficient magnitude below which the reduction certifies that no relation
/// with residual <= tol can exist.
struct RelationResult {
    bool found = false;
    IntRow q;
    double residual = 0.0;
    double certified_bound = 0.0;
};

/// Searches for a nonzero integer vector q with |q . v| <= tol by reducing
/// the (d+1)-column lattice [I | gamma*v] and scanning short vectors.
/// Deterministic for fixed inputs.
RelationResult integer_relation(const RelationQuery& query);

/// Rational rank of the coordinate set: d minus the number of independent
/// integer relations found by iterated detection. After each hit the pivot
/// coordinate (largest |q_i|) is eliminated; over Q the remaining coordinates
/// span the same space. Desk scale d <= 16.
int kronecker_dimension(std::vector<double> v, double tol = 1e-9, long long bound = 100);

} // namespace cslab
