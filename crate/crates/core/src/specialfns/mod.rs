//! Gamma function, generalized hypergeometric series and the biorthogonal
//! pair (P_k, Q_k) of the product ensemble.

mod biorthogonal;
mod gamma;
mod hypergeometric;

pub use biorthogonal::{
    delta_pow, eval_p, p_hat_table, prefer_recurrence, recurrence_coeff_a, eval_q, eval_q_contour, eval_q_series, ln_scale, p_hat_coeffs, p_hat_deltas,
    q_hat_contour, q_hat_deltas, q_series_condition, EnsembleSpec, Family, QRoute, SERIES_CANCELLATION_LIMIT,
};
pub use gamma::{gamma, ln_factorial, ln_gamma, ln_gamma_complex, ln_gamma_signed, ln_pochhammer_signed, pochhammer};
pub use hypergeometric::{eval_poly, hyp_pfq, hyp_series_weighted, hyp_series_weighted_mag, terminating_coefficients, CompensatedSum};
