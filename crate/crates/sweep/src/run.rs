//! Per-point pipeline and the parallel sweep driver.

use optomech_core::covariance::{lyapunov_relative_residual, CovarianceOptions};
use optomech_core::{
    build_linear_model, derive, duan, eigen_stability, log_negativity, output_covariance,
    output_spectrum, reduce, select_working_point, solve_lyapunov, solve_steady_state,
    BipartitionId, CovarianceMatrix, Error, LinearModel, SteadyStateOptions,
};
use rayon::prelude::*;

use crate::config::{Output, SweepConfig};

/// Outcome class of one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reason {
    Ok,
    /// Working point is dynamically unstable; measures are withheld.
    Unstable,
    InvalidParameters,
    NoConvergence,
    NoRoot,
    SolverFailure,
    Unphysical,
}

impl Reason {
    pub fn code(self) -> &'static str {
        match self {
            Reason::Ok => "ok",
            Reason::Unstable => "unstable",
            Reason::InvalidParameters => "invalid_parameters",
            Reason::NoConvergence => "no_convergence",
            Reason::NoRoot => "no_root",
            Reason::SolverFailure => "solver_failure",
            Reason::Unphysical => "unphysical",
        }
    }

    /// Unstable points are a physical result, not a failure.
    pub fn is_failure(self) -> bool {
        !matches!(self, Reason::Ok | Reason::Unstable)
    }

    fn of(e: &Error) -> Reason {
        match e {
            Error::InvalidParameter { .. } | Error::Convention(_) | Error::Validity { .. } => {
                Reason::InvalidParameters
            }
            Error::NoConvergence { .. } => Reason::NoConvergence,
            Error::IndexOutOfRange { .. } => Reason::NoRoot,
            Error::UnphysicalCm(_) => Reason::Unphysical,
            Error::UnstableModel { .. } => Reason::Unstable,
            _ => Reason::SolverFailure,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SteadyStateSummary {
    pub n_roots: usize,
    pub root_index: usize,
    pub q_s: [f64; 2],
    pub intensity: [f64; 2],
    pub delta_eff_over_omega_m: [f64; 2],
    pub residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StabilitySummary {
    pub stable_eigen: bool,
    pub stable_rh: bool,
    pub max_re_eig_over_omega_m: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Measures {
    pub en_mirror_mirror: Option<f64>,
    pub eta_minus_mirror_mirror: Option<f64>,
    pub duan_mirror_mirror: Option<f64>,
    pub en_beam_beam: Option<f64>,
    pub duan_beam_beam: Option<f64>,
    pub s_out: Option<f64>,
    pub lyapunov_residual: Option<f64>,
    pub physicality: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRow {
    pub omega_over_omega_m: f64,
    pub s_out: f64,
    pub en_beam_beam: f64,
    pub duan_beam_beam: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub index: usize,
    pub axis_values: Vec<f64>,
    pub reason: Reason,
    pub message: String,
    pub steady: Option<SteadyStateSummary>,
    pub stability: Option<StabilitySummary>,
    pub measures: Measures,
    pub spectrum: Vec<SpectrumRow>,
    /// Drift, diffusion and covariance, kept only when matrices are exported.
    pub matrices: Option<(LinearModel<f64>, Option<CovarianceMatrix<f64>>)>,
}

impl SweepRecord {
    fn new(index: usize, axis_values: Vec<f64>) -> Self {
        SweepRecord {
            index,
            axis_values,
            reason: Reason::Ok,
            message: String::new(),
            steady: None,
            stability: None,
            measures: Measures::default(),
            spectrum: Vec::new(),
            matrices: None,
        }
    }

    fn fail(mut self, e: &Error) -> Self {
        self.reason = Reason::of(e);
        self.message = e.to_string();
        self.measures = Measures::default();
        self.spectrum.clear();
        self
    }
}

/// Runs every grid point in parallel; records come back in grid order.
pub fn run_sweep(cfg: &SweepConfig, keep_matrices: bool) -> Vec<SweepRecord> {
    cfg.grid()
        .into_par_iter()
        .enumerate()
        .map(|(i, point)| run_point(cfg, i, point, keep_matrices))
        .collect()
}

pub fn run_point(
    cfg: &SweepConfig,
    index: usize,
    point: Vec<f64>,
    keep_matrices: bool,
) -> SweepRecord {
    let rec = SweepRecord::new(index, point);
    let params = match cfg.params_at(&rec.axis_values) {
        Ok(p) => p,
        Err(e) => {
            let mut rec = rec;
            rec.reason = Reason::InvalidParameters;
            rec.message = e.to_string();
            return rec;
        }
    };
    let mut rec = rec;
    match pipeline(cfg, &params, &mut rec, keep_matrices) {
        Ok(()) => rec,
        Err(e) => rec.fail(&e),
    }
}

fn pipeline(
    cfg: &SweepConfig,
    params: &optomech_core::PhysicalParams<f64>,
    rec: &mut SweepRecord,
    keep_matrices: bool,
) -> Result<(), Error> {
    let tol = &cfg.tolerances;
    let d = derive(params)?;
    let ss_opts = SteadyStateOptions {
        root_abs_tol: tol.root_abs_tol,
        residual_rel_tol: tol.steady_residual_rel_tol,
        ..Default::default()
    };
    let roots = solve_steady_state(&d, &ss_opts)?;
    let wp = select_working_point(&roots, cfg.branch_policy.into())?;
    let w = d.omega_m;
    rec.steady = Some(SteadyStateSummary {
        n_roots: roots.len(),
        root_index: wp.root_index,
        q_s: wp.q_s,
        intensity: wp.intensity,
        delta_eff_over_omega_m: [wp.delta_eff[0] / w, wp.delta_eff[1] / w],
        residual: wp.residual(&d),
    });

    let model = build_linear_model(&wp, &d);
    let report = eigen_stability(&model, tol.stability_margin_over_omega_m * w)?;
    rec.stability = Some(StabilitySummary {
        stable_eigen: report.is_stable_eigen,
        stable_rh: report.is_stable_rh,
        max_re_eig_over_omega_m: report.max_real_part / w,
    });
    if keep_matrices {
        rec.matrices = Some((model.clone(), None));
    }
    if !report.is_stable_eigen {
        rec.reason = Reason::Unstable;
        rec.message = format!("max Re(eig) = {:e} omega_m", report.max_real_part / w);
        return Ok(());
    }

    let cov_opts = CovarianceOptions {
        lyapunov_rel_tol: tol.lyapunov_rel_tol,
        physicality_tol: tol.physicality_tol,
    };
    let v = solve_lyapunov(&model, &cov_opts)?;
    let m = &mut rec.measures;
    m.lyapunov_residual = Some(lyapunov_relative_residual(&model, &v));
    m.physicality = Some(v.physicality());
    if cfg.wants(Output::EnMirrorMirror) || cfg.wants(Output::Duan) {
        let mm = reduce(&v, BipartitionId::MirrorMirror)?;
        let e = log_negativity(&mm)?;
        if cfg.wants(Output::EnMirrorMirror) {
            m.en_mirror_mirror = Some(e.log_negativity);
            m.eta_minus_mirror_mirror = Some(e.eta_minus);
        }
        if cfg.wants(Output::Duan) {
            m.duan_mirror_mirror = Some(duan(&mm)?);
        }
    }
    if cfg.wants(Output::EnBeamBeam) {
        let out = output_covariance(&model, cfg.beam_frequency_over_omega_m * w)?;
        m.en_beam_beam = Some(out.entanglement.log_negativity);
        m.s_out = Some(out.s_out);
        if cfg.wants(Output::Duan) {
            m.duan_beam_beam = Some(duan(&out.v_out)?);
        }
    }
    if cfg.wants(Output::Spectrum) {
        let g = &cfg.spectrum;
        let grid: Vec<f64> = optomech_core::covariance::frequency_grid(
            g.min_over_omega_m,
            g.max_over_omega_m,
            g.n_points,
        )
        .into_iter()
        .map(|x| x * w)
        .collect();
        for pt in output_spectrum(&model, &grid) {
            let pt = pt?;
            rec.spectrum.push(SpectrumRow {
                omega_over_omega_m: pt.omega / w,
                s_out: pt.s_out,
                en_beam_beam: pt.entanglement.log_negativity,
                duan_beam_beam: duan(&pt.v_out)?,
            });
        }
    }
    if keep_matrices {
        rec.matrices = Some((model, Some(v)));
    }
    Ok(())
}
