//! Calibration: fits that turn measured powers and spectra into g0,
//! occupations, n_R and the output shunt. All fits share one deterministic
//! damped Gauss-Newton engine.

pub mod fit;
pub mod floor;
pub mod lorentzian;
pub mod shunt;
pub mod thermometry;

pub use fit::{fit_line, gauss_newton, GnOptions, GnResult, LineFit};
pub use floor::{
    difference_offset, fit_output_occupation, noise_floor_increase, output_floor_model,
    sideband_difference_and_average, FloorFit,
};
pub use lorentzian::{
    fit_lorentzian, fit_lorentzians, fit_lorentzians_weighted, LorentzianFit, MultiLorentzianFit,
    Peak,
};
pub use shunt::{
    delta_from_ratio_db, fit_shunt_capacitance, s21_bare, s21_shunt, shunt_delta,
    transmission_ratio_db, ShuntFit, ShuntModel,
};
pub use thermometry::{
    bose_occupation, fit_linewidth_vs_power, fit_thermometry, g0_from_linewidth_slope,
    thermometry_occupation, thermometry_ratio, CalibrationRun, LinewidthFit, PumpChannel,
    ThermometryFit,
};
