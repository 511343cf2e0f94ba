#pragma once

#include <random>
#include <utility>
#include <vector>

#include "ergo/observables.hpp"
#include "ergo/systems.hpp"

namespace ergo {

/// A function on Z/N given by its value table.
struct ComplexSignal {
    i64 N = 0;
    std::vector<cplx> values;
    double sup_bound = 0.0;  // >= max |values[x]|
};

ComplexSignal make_signal(std::vector<cplx> values);

enum class GowersMethod { Recursive, Spectral, CubeSum, Quadrature };

struct GowersValue {
    i64 k = 0;
    double value = 0.0;
    GowersMethod method = GowersMethod::Recursive;
};

/// Box norm of order k on Z/N, through the derivative recursion
///   ||f||_{U_1} = |E f|,   ||f||_{U_k}^{2^k} = E_h ||D_h f||_{U_{k-1}}^{2^{k-1}},
/// where D_h f(x) = f(x+h) conj f(x).  Odd-weight cube vertices carry a
/// conjugation, so the value is real and nonnegative for complex inputs and
/// matches the plain product definition on real inputs.
GowersValue gowers_norm(const ComplexSignal& f, i64 k, int threads = 1);

/// Same value by direct enumeration of all (x, h_1..h_k) cube configurations.
GowersValue gowers_norm_cube_sum(const ComplexSignal& f, i64 k, int threads = 1);

/// Order-2 value as the l^4 norm of the normalized Fourier transform:
/// (sum_xi |fhat(xi)|^4)^{1/4}.  This shortcut is valid only at k = 2.
GowersValue gowers_u2_spectral(const ComplexSignal& f);

/// Box inner product of a 2^k-tuple indexed by the vertex mask eps
/// (bit j-1 of the mask is eps_j):  E_{x,h} prod_eps C^{|eps|} f_eps(x + eps.h).
cplx gowers_inner(const std::vector<ComplexSignal>& fs, i64 k, int threads = 1);

/// (|gowers_inner|, prod_eps ||f_eps||_{U_k}); first <= second + tolerance.
std::pair<double, double> csg_check(const std::vector<ComplexSignal>& fs, i64 k, int threads = 1);

/// (||f||_{U_{k+1}}^{2^{k+1}},  (1/N) sum_n ||D_n f||_{U_k}^{2^k}) computed by
/// two independent paths (direct cube enumeration vs. derivative recursion).
std::pair<double, double> seminorm_recursion_check(const ComplexSignal& f, i64 k, int threads = 1);

/// One parallelepiped configuration x_eps = z + eps.t in a compact abelian
/// group (cyclic residues or a torus rotation's phase space).
struct CubeSample {
    i64 k = 0;
    PhasePoint base;                   // z
    std::vector<PhasePoint> shifts;    // t_1..t_k
    std::vector<PhasePoint> vertices;  // indexed by the eps bitmask, size 2^k
};

CubeSample cube_sample(const SystemSpec& sys, i64 k, std::mt19937_64& rng);
/// Deterministic variant: decodes grid_index into (z, t_1..t_k) on the M-point
/// per-axis grid (residues themselves for a cyclic system).
CubeSample cube_sample_grid(const SystemSpec& sys, i64 k, i64 grid_index, i64 M);

/// Group addition for the systems cube_sample supports.
PhasePoint group_add(const SystemSpec& sys, const PhasePoint& a, const PhasePoint& b);

/// Box norm of an observable over a one-dimensional rotation's phase space,
/// by sampling on the M-point grid i/M and taking the exact finite value of
/// the sampled signal: value^{2^k} = M^{-(k+1)} sum_{z,t} prod_eps C^{|eps|} f(z + eps.t).
GowersValue rotation_seminorm_quadrature(const Observable& f, const SystemSpec& sys, i64 k, i64 M,
                                         int threads = 1);

struct GvnReport {
    double correlation = 0.0;  // |E_{x,y} prod_j f_j(x + j y)|
    double bound = 0.0;        // min_j ||f_j||_{U_k}
    double ratio = 0.0;        // correlation / bound (0 when both vanish)
};

/// Finite analogue of the generalized von Neumann estimate on Z/N, N prime:
/// the (k+1)-term progression correlation against the weakest box norm.
GvnReport gvn_ratio(const std::vector<ComplexSignal>& fs, i64 k, int threads = 1);

/// Values ||f||_{U_1..k_max}; the sequence must be nondecreasing.
std::vector<GowersValue> monotonicity_check(const ComplexSignal& f, i64 k_max, int threads = 1);

}  // namespace ergo
