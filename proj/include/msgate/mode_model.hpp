#pragma once

#include <Eigen/Dense>
#include <vector>

namespace msgate {

// Motional-mode data of a linear ion chain: frequencies omega_k (rad/s, sorted
// descending), normalized coupling b_j^k (ion-major rows), Lamb-Dicke parameters
// eta_k and drift ratios r_k. Immutable by convention once constructed; every
// constructor and the file loader run validate().
struct ModeSpec {
    int num_ions = 0;
    std::vector<double> mode_freqs;   // rad/s, one per mode
    Eigen::MatrixXd coupling;         // num_ions x num_modes, orthonormal columns
    std::vector<double> lamb_dicke;   // per mode
    std::vector<double> drift_ratios; // per mode, default all 1

    int num_modes() const { return static_cast<int>(mode_freqs.size()); }

    // Throws ValidationError on shape mismatch, non-positive frequencies,
    // negative Lamb-Dicke parameters or non-orthonormal coupling (tol 1e-12).
    void validate() const;
};

// Two-ion radial modes: COM at omega_com, tilt at omega_tilt, coupling exactly
// [[1,1],[1,-1]]/sqrt(2) (ion x mode), equal Lamb-Dicke parameters, r_k = 1.
// Requires omega_com > omega_tilt > 0.
ModeSpec two_ion_modes(double omega_com, double omega_tilt, double eta);

// Radial modes of a harmonically confined Coulomb chain. Equilibrium positions
// by damped Newton iteration, radial Hessian diagonalized, modes sorted
// descending in frequency; eta_k = eta_com * sqrt(omega_com / omega_k).
// Column sign convention: first nonzero entry of each eigenvector positive.
// Throws NumericError on Newton non-convergence and a structural error naming
// the unstable mode if any radial eigenvalue is non-positive (zig-zag).
ModeSpec chain_modes(int num_ions, double axial_freq, double radial_freq, double eta_com);

// Dimensionless equilibrium positions u_i (ascending), length scale
// (e^2 / (4 pi eps0 m omega_ax^2))^(1/3).
std::vector<double> chain_equilibrium(int num_ions, int max_iters = 200, double tol = 1e-13);

}  // namespace msgate
