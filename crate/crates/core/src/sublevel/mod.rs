//! Measures of sublevel sets on grids and by Monte Carlo, and log-log fits
//! of their decay in `eps`.

mod fit;
mod measures;
mod sampling;

pub use fit::{fit_exponent, ExponentFit};
pub use measures::{
    derivative_floor, generic_analytic_sublevel, quant_sublevel_harness, run_sweep, sample_analytic,
    sample_sublevel, sublevel_mask, sublevel_measure, two_term_measure_3d, write_sweep_csv, EpsRange, QuantReport,
    Sweep, TwoTerm, FLOOR_GRID,
};
pub use sampling::{CellSample, MeasureConfig, MeasureEstimate, Method, Sample, Sampled, MC_BATCH};
