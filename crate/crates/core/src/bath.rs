//! Bath jump rates `gamma(omega)`.
//!
//! Every model satisfies detailed balance `gamma(w) = e^{beta w} gamma(-w)`.

use std::path::Path;

use crate::channels::{BalancePair, ChannelRegistry, DetailedBalanceReport, FREQUENCY_TOL};
use crate::error::{Error, Result};

/// Fermi energy cutoff beyond the chemical potential, in units of `1/beta`.
pub const CUTOFF_WIDTHS: f64 = 40.0;
const QUAD_REL_TOL: f64 = 1e-10;
const QUAD_MAX_INTERVALS: usize = 10_000;

/// Free electron gas coupled with a constant matrix element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElectronBath {
    pub beta: f64,
    pub mu_chem: f64,
    pub e_fermi: f64,
    pub n_electrons: f64,
    pub coupling: f64,
    pub e_max: f64,
}

impl ElectronBath {
    /// Cutoff placed `CUTOFF_WIDTHS + 10` thermal widths above `mu_chem`.
    pub fn new(beta: f64, mu_chem: f64, e_fermi: f64, n_electrons: f64, coupling: f64) -> Self {
        ElectronBath {
            beta,
            mu_chem,
            e_fermi,
            n_electrons,
            coupling,
            e_max: mu_chem + (CUTOFF_WIDTHS + 10.0) / beta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "electron bath needs finite beta > 0, got {}",
                self.beta
            )));
        }
        if !(self.e_fermi > 0.0) || !(self.n_electrons > 0.0) {
            return Err(Error::InvalidParameter(
                "e_fermi and n_electrons must be positive".into(),
            ));
        }
        let needed = self.mu_chem + CUTOFF_WIDTHS / self.beta;
        if !(self.e_max >= needed) {
            return Err(Error::InvalidParameter(format!(
                "e_max = {} must be >= mu_chem + 40/beta = {needed}",
                self.e_max
            )));
        }
        Ok(())
    }

    pub fn prefactor(&self) -> f64 {
        9.0 * self.n_electrons.powi(2) * self.coupling.powi(2)
            / (4.0 * self.e_fermi.powi(3) * 2.0 * std::f64::consts::PI)
    }

    /// Fermi occupation and its complement, `(f(E), 1 - f(E))`, evaluated
    /// without cancellation.
    fn occupation(&self, e: f64) -> (f64, f64) {
        let x = self.beta * (e - self.mu_chem);
        if x >= 0.0 {
            let z = (-x).exp();
            (z / (1.0 + z), 1.0 / (1.0 + z))
        } else {
            let z = x.exp();
            (1.0 / (1.0 + z), z / (1.0 + z))
        }
    }
}

/// Golden-rule rate for releasing energy `omega` into the electron bath:
/// an electron at `E` absorbs `omega` and lands at `E + omega`.
pub fn electron_rate(model: &ElectronBath, omega: f64) -> Result<f64> {
    model.validate()?;
    let e0 = (-omega).max(0.0);
    if model.e_max <= e0 {
        return Ok(0.0);
    }
    // E = e0 + u^2 removes the square-root endpoint singularity
    let integrand = |u: f64| {
        let e = e0 + u * u;
        let (f, _) = model.occupation(e);
        let (_, empty) = model.occupation(e + omega);
        let dos = (e * (e + omega)).max(0.0).sqrt();
        2.0 * u * f * empty * dos
    };
    let u_max = (model.e_max - e0).sqrt();
    // seed the mesh around the Fermi edge, where the integrand varies
    let width = 1.0 / model.beta;
    let mut breaks = vec![0.0, u_max];
    for k in -8..=8 {
        for edge in [model.mu_chem, model.mu_chem - omega] {
            let e = edge + 5.0 * k as f64 * width;
            if e > e0 && e < model.e_max {
                breaks.push((e - e0).sqrt());
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let value = integrate_adaptive(integrand, &breaks, QUAD_REL_TOL, QUAD_MAX_INTERVALS)?;
    Ok(model.prefactor() * value)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// 15-point Kronrod estimate and its difference from the embedded 7-point
/// Gauss rule.
fn gauss_kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let pair = f(c - x) + f(c + x);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive Gauss-Kronrod quadrature over consecutive `breaks`.
pub fn integrate_adaptive(f: impl Fn(f64) -> f64, breaks: &[f64], rel_tol: f64, max_intervals: usize) -> Result<f64> {
    let mut intervals: Vec<(f64, f64, f64, f64)> = breaks
        .windows(2)
        .map(|w| {
            let (v, e) = gauss_kronrod(&f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    loop {
        let total: f64 = intervals.iter().map(|i| i.2).sum();
        let error: f64 = intervals.iter().map(|i| i.3).sum();
        if error <= rel_tol * total.abs() || error == 0.0 {
            return Ok(total);
        }
        if intervals.len() >= max_intervals {
            return Err(Error::QuadratureFailure {
                tolerance: rel_tol,
                estimate: error / total.abs(),
            });
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, iv)| if iv.3 > best.1 { (i, iv.3) } else { best });
        let (a, b, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (a + b);
        for (lo, hi) in [(a, mid), (mid, b)] {
            let (v, e) = gauss_kronrod(&f, lo, hi);
            intervals.push((lo, hi, v, e));
        }
    }
}

/// Rates read from a table of `(omega, gamma)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedRates {
    pub beta: f64,
    pub points: Vec<(f64, f64)>,
}

impl TabulatedRates {
    /// Two-column CSV `omega,gamma`; `#` lines and a non-numeric header row
    /// are skipped.
    pub fn from_csv(path: &Path, beta: f64) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut points = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            if record.len() != 2 {
                return Err(Error::config(
                    "rates.table",
                    format!("row {}: expected 2 columns, got {}", line + 1, record.len()),
                ));
            }
            let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse).collect();
            match parsed {
                Ok(v) => points.push((v[0], v[1])),
                Err(_) if line == 0 => continue,
                Err(e) => return Err(Error::config("rates.table", format!("row {}: {e}", line + 1))),
            }
        }
        Ok(TabulatedRates { beta, points })
    }

    pub fn lookup(&self, omega: f64) -> Result<f64> {
        let tol = 1e-9 * omega.abs().max(1.0);
        self.points
            .iter()
            .find(|(w, _)| (w - omega).abs() <= tol)
            .map(|(_, g)| *g)
            .ok_or(Error::MissingRate { omega })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RateModel {
    ElectronBath(ElectronBath),
    /// `gamma0 / (1 + e^{-beta omega})`; `beta` may be infinite.
    Phenomenological {
        gamma0: f64,
        beta: f64,
    },
    Tabulated(TabulatedRates),
}

impl RateModel {
    pub fn beta(&self) -> f64 {
        match self {
            RateModel::ElectronBath(b) => b.beta,
            RateModel::Phenomenological { beta, .. } => *beta,
            RateModel::Tabulated(t) => t.beta,
        }
    }

    pub fn rate(&self, omega: f64) -> Result<f64> {
        match self {
            RateModel::ElectronBath(b) => electron_rate(b, omega),
            RateModel::Phenomenological { gamma0, beta } => {
                if beta.is_infinite() {
                    Ok(if omega > 0.0 {
                        *gamma0
                    } else if omega < 0.0 {
                        0.0
                    } else {
                        0.5 * gamma0
                    })
                } else {
                    // logistic form, stable for large |beta omega|
                    let x = beta * omega;
                    Ok(if x >= 0.0 {
                        gamma0 / (1.0 + (-x).exp())
                    } else {
                        gamma0 * x.exp() / (1.0 + x.exp())
                    })
                }
            }
            RateModel::Tabulated(t) => t.lookup(omega),
        }
    }
}

/// Residual `|gamma(w) e^{-beta w} / gamma(-w) - 1|`; for infinite `beta`
/// the backward rate must vanish and the residual is `gamma(-w)/gamma(w)`.
pub fn balance_residual(beta: f64, omega: f64, forward: f64, backward: f64) -> f64 {
    if forward == 0.0 && backward == 0.0 {
        return 0.0;
    }
    if beta.is_infinite() {
        return if forward == 0.0 {
            f64::INFINITY
        } else {
            backward / forward
        };
    }
    if backward == 0.0 {
        return f64::INFINITY;
    }
    ((-beta * omega).exp() * forward / backward - 1.0).abs()
}

/// Attach `gamma(omega)` to every channel together with a detailed-balance
/// report over the `(omega, -omega)` channel pairs with `omega >= 0`.
pub fn fill_rates(registry: &ChannelRegistry, model: &RateModel) -> Result<ChannelRegistry> {
    let gammas = registry
        .channels()
        .iter()
        .map(|c| model.rate(c.omega))
        .collect::<Result<Vec<_>>>()?;
    let beta = model.beta();
    let tol = FREQUENCY_TOL * registry.omega_l();
    let mut pairs = Vec::new();
    for c in registry.channels() {
        if c.omega < -tol {
            continue;
        }
        if let Some(p) = registry.partner(c.id) {
            let (fwd, bwd) = (gammas[c.id], gammas[p]);
            pairs.push(BalancePair {
                omega: c.omega,
                gamma_forward: fwd,
                gamma_backward: bwd,
                residual: balance_residual(beta, c.omega, fwd, bwd),
            });
        }
    }
    let max_residual = pairs.iter().map(|p| p.residual).fold(0.0, f64::max);
    registry.with_rates(
        &gammas,
        Some(DetailedBalanceReport {
            beta,
            pairs,
            max_residual,
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_bath() -> ElectronBath {
        ElectronBath::new(1.0, 10.0, 10.0, 1.0, 1.0)
    }

    // 40-digit mpmath quadrature of the same integral
    const ORACLE: [(f64, f64); 6] = [
        (1.0, 0.005657682826148314162646704),
        (-1.0, 0.002081345196408708275812844),
        (0.1, 0.003762987295000008065049027),
        (-0.1, 0.003404891708109927005607884),
        (5.0, 0.01741012236770282424067501),
        (-5.0, 0.0001173084817611740117271265),
    ];

    #[test]
    fn electron_rate_matches_high_precision_oracle() {
        let bath = reference_bath();
        for (w, want) in ORACLE {
            let got = electron_rate(&bath, w).unwrap();
            assert!(((got - want) / want).abs() < 1e-9, "w={w}: {got} vs {want}");
        }
    }

    #[test]
    fn electron_rate_detailed_balance() {
        let bath = reference_bath();
        for w in [0.5, 2.0, 5.0, 0.1, 1.0] {
            let f = electron_rate(&bath, w).unwrap();
            let b = electron_rate(&bath, -w).unwrap();
            assert!(balance_residual(1.0, w, f, b) < 1e-8);
        }
    }

    #[test]
    fn high_temperature_rates_are_symmetric() {
        let bath = ElectronBath::new(1e-8, 10.0, 10.0, 1.0, 1.0);
        let f = electron_rate(&bath, 0.5).unwrap();
        let b = electron_rate(&bath, -0.5).unwrap();
        assert!((f / b - 1.0).abs() < 1e-6);
    }

    #[test]
    fn short_cutoff_is_rejected() {
        let mut bath = reference_bath();
        bath.e_max = 20.0;
        assert!(matches!(electron_rate(&bath, 1.0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn tiny_budget_reports_quadrature_failure() {
        let r = integrate_adaptive(|x: f64| x.abs().sqrt(), &[-1.0, 1.0], 1e-15, 2);
        assert!(matches!(r, Err(Error::QuadratureFailure { .. })));
    }

    #[test]
    fn quadrature_of_smooth_function() {
        let v = integrate_adaptive(f64::sin, &[0.0, std::f64::consts::PI], 1e-12, 100).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn phenomenological_balance_is_exact() {
        let m = RateModel::Phenomenological { gamma0: 0.3, beta: 2.0 };
        for w in [0.05, 0.5, 3.0, 40.0] {
            let f = m.rate(w).unwrap();
            let b = m.rate(-w).unwrap();
            assert!(balance_residual(2.0, w, f, b) < 1e-14);
        }
        let cold = RateModel::Phenomenological {
            gamma0: 0.3,
            beta: f64::INFINITY,
        };
        assert_eq!(cold.rate(-1.0).unwrap(), 0.0);
        assert_eq!(cold.rate(1.0).unwrap(), 0.3);
    }

    #[test]
    fn tabulated_lookup() {
        let t = TabulatedRates {
            beta: 1.0,
            points: vec![(1.0, 0.2), (-1.0, 0.2 / std::f64::consts::E)],
        };
        assert_eq!(t.lookup(1.0 + 1e-12).unwrap(), 0.2);
        assert_eq!(t.lookup(2.0), Err(Error::MissingRate { omega: 2.0 }));
    }

    #[test]
    fn tabulated_csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rates.csv");
        std::fs::write(&path, "omega,gamma\n# comment\n0.5, 0.1\n-0.5,0.05\n").unwrap();
        let t = TabulatedRates::from_csv(&path, 1.0).unwrap();
        assert_eq!(t.points, vec![(0.5, 0.1), (-0.5, 0.05)]);
    }
}
