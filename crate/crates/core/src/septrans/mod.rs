//! Exponential separation of `{0, ±1}` polynomials and transversality
//! diagnostics for power series with `{0, ±1}` coefficients.

mod poly;
mod transversality;

pub use poly::{
    horner, min_poly_brute, min_poly_value, separation_profile, separation_profile_with_resolution, PolyClass, PolyMin, ProfileRow, MAX_BRUTE_DEGREE,
    MAX_MITM_DEGREE,
};
pub use transversality::{
    double_zero_scan, series_roots, transversality_measure, DoubleZeroReport, Root, SeriesSample, TransversalityMeasure,
    Violation, ViolationKind, MAX_SERIES_DEGREE, MEASURE_RESOLUTION,
};
