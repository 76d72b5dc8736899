//! Units and sign conventions used throughout the crate.
//!
//! The text is embedded in run manifests (via its checksum) so that output
//! files can be matched to the conventions that produced them.

pub const CONVENTIONS: &str = "\
quadratures: X = (c + c^dag)/sqrt(2), Y = (c - c^dag)/(i sqrt(2)); vacuum variance 1/2
mechanics: q = x/x_zpf, x_zpf = sqrt(hbar/(m omega_m)); [q, p] = i
frequencies, rates and couplings: rad/s
kappa: amplitude decay rate; dc/dt = -kappa c + sqrt(2 kappa) c_in
gamma_m: mechanical energy damping, acting on p only
chi: (omega_c / L) x_zpf
lambda: 2 k Q1 Q2 / (r0^3 m omega_m), k = 8.9875517923e9 N m^2/C^2
drive: eps_p = sqrt(2 P kappa / (hbar omega_p)); Delta0 = omega_c - omega_p
radiation pressure: dp_m/dt contains + sigma_m chi |c_m|^2, sigma = (+1, +1) unless configured alternating (-1, +1)
effective detuning: Delta_m = Delta0 - sigma_m chi q_m
occupations: Bose-Einstein, zero at T = 0; cavity occupation evaluated at omega_c
state ordering: (q1, p1, q2, p2, X1, Y1, X2, Y2); intracavity fields rotated to real steady amplitudes
covariance: V_ij = <{f_i, f_j}>/2
output field: c_out = sqrt(2 kappa) c - c_in; spectra use V_out(omega) = Re[T(omega) T(omega)^dag]
EPR squeezing: S_out = [Var(X1 + X2) + Var(Y1 - Y2)]/2, equal to 1 for vacuum
log-negativity: E_N = max(0, -ln(2 eta_minus))
Duan: Var(Q_a + Q_b) + Var(P_a - P_b) < 2 certifies entanglement
";
