//! Jump paths between ladder labels and their time reversal.

use crate::channels::{ChannelRegistry, JumpChannel};
use crate::dynamics::master::{LadderPopulations, PauliRates};
use crate::dynamics::{QubitState, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::thermo::MeanSe;
use crate::Branch;

/// A ladder site `(branch, zone)`.
pub type Label = (Branch, i64);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathJump {
    pub t: f64,
    pub channel: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub initial: Label,
    pub jumps: Vec<PathJump>,
    pub t_final: f64,
    /// Ladder population of the initial label at `t = 0`.
    pub p_initial: Option<f64>,
    /// Ladder population of the final label at `t_final`.
    pub p_final: Option<f64>,
}

/// Label reached by applying `channel` to `label`; zone `m` goes to `m - n`.
pub fn apply_to_label(channel: &JumpChannel, label: Label) -> Result<Label> {
    let mut hits = channel
        .entries
        .iter()
        .filter(|e| e.from == label.0 && e.alpha.norm_sqr() > 0.0);
    match (hits.next(), hits.next()) {
        (Some(e), None) => Ok((e.to, label.1 - channel.n_omega)),
        (None, _) => Err(Error::InvalidPath(format!(
            "channel {} has no transition out of {}",
            channel.id, label.0
        ))),
        _ => Err(Error::InvalidPath(format!(
            "channel {} maps {} onto a superposition",
            channel.id, label.0
        ))),
    }
}

fn pure_label(psi: &QubitState) -> Option<Branch> {
    match (psi.population(Branch::Plus) > 0.0, psi.population(Branch::Minus) > 0.0) {
        (true, false) => Some(Branch::Plus),
        (false, true) => Some(Branch::Minus),
        _ => None,
    }
}

impl PathRecord {
    pub fn new(initial: Label, jumps: Vec<PathJump>, t_final: f64) -> Self {
        PathRecord {
            initial,
            jumps,
            t_final,
            p_initial: None,
            p_final: None,
        }
    }

    /// Path of a qubit trajectory started in a Floquet state, zone 0.
    pub fn from_trajectory(record: &TrajectoryRecord<QubitState>) -> Result<Self> {
        let branch = pure_label(&record.initial)
            .ok_or_else(|| Error::InvalidPath("initial state is not a single Floquet state".into()))?;
        let jumps = record
            .events
            .iter()
            .map(|e| PathJump {
                t: e.t,
                channel: e.channel,
            })
            .collect();
        Ok(PathRecord::new((branch, 0), jumps, record.t_final))
    }

    /// Labels visited, one more than the number of jumps.
    pub fn labels(&self, registry: &ChannelRegistry) -> Result<Vec<Label>> {
        let mut out = Vec::with_capacity(self.jumps.len() + 1);
        let mut label = self.initial;
        out.push(label);
        let mut last_t = 0.0;
        for j in &self.jumps {
            if j.channel >= registry.len() {
                return Err(Error::InvalidPath(format!("unknown channel {}", j.channel)));
            }
            if j.t < last_t || j.t > self.t_final {
                return Err(Error::InvalidPath(format!("jump time {} out of order", j.t)));
            }
            last_t = j.t;
            label = apply_to_label(registry.channel(j.channel), label)?;
            out.push(label);
        }
        Ok(out)
    }

    pub fn final_label(&self, registry: &ChannelRegistry) -> Result<Label> {
        Ok(*self.labels(registry)?.last().expect("at least the initial label"))
    }

    /// Heat released along the path.
    pub fn heat(&self, registry: &ChannelRegistry) -> f64 {
        self.jumps
            .iter()
            .fold(0.0, |a, j| a + registry.channel(j.channel).omega)
    }

    /// Attach Pauli ladder populations at the two ends.
    pub fn with_populations(
        mut self,
        registry: &ChannelRegistry,
        start: &LadderPopulations,
        end: &LadderPopulations,
    ) -> Result<Self> {
        let (b, z) = self.final_label(registry)?;
        self.p_initial = Some(start.get(self.initial.0, self.initial.1));
        self.p_final = Some(end.get(b, z));
        Ok(self)
    }
}

/// `ln` of the path density: jump rates times survival between jumps.
pub fn path_log_density(path: &PathRecord, registry: &ChannelRegistry) -> Result<f64> {
    let labels = path.labels(registry)?;
    let escape = PauliRates::from_registry(registry).escape;
    let mut log = 0.0;
    let mut t = 0.0;
    for (j, label) in path.jumps.iter().zip(&labels) {
        log -= (j.t - t) * escape[label.0.index()];
        let c = registry.channel(j.channel);
        let (to, _) = apply_to_label(c, *label)?;
        t = j.t;
        log += (c.gamma * c.strength(to, label.0)).ln();
    }
    let last = labels.last().expect("at least the initial label");
    log -= (path.t_final - t) * escape[last.0.index()];
    Ok(log)
}

/// Time-reversed path: partner channels at `-omega`, mirrored times,
/// starting from the forward path's final label.
pub fn reverse_path(path: &PathRecord, registry: &ChannelRegistry) -> Result<PathRecord> {
    let start = path.final_label(registry)?;
    let jumps = path
        .jumps
        .iter()
        .rev()
        .map(|j| {
            registry
                .partner(j.channel)
                .map(|c| PathJump {
                    t: path.t_final - j.t,
                    channel: c,
                })
                .ok_or_else(|| Error::InvalidPath(format!("channel {} has no reverse partner", j.channel)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PathRecord {
        initial: start,
        jumps,
        t_final: path.t_final,
        p_initial: path.p_final,
        p_final: path.p_initial,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluctuationCheck {
    pub log_forward: f64,
    pub log_reverse: f64,
    /// `beta * sum omega` along the forward path.
    pub entropy_flow: f64,
    pub residual: f64,
}

/// `|ln P_F - ln P_R - beta sum omega|` for one path.
pub fn fluctuation_residual(path: &PathRecord, registry: &ChannelRegistry, beta: f64) -> Result<FluctuationCheck> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "beta must be finite and positive, got {beta}"
        )));
    }
    let reverse = reverse_path(path, registry)?;
    let log_forward = path_log_density(path, registry)?;
    let log_reverse = path_log_density(&reverse, registry)?;
    let entropy_flow = beta * path.heat(registry);
    Ok(FluctuationCheck {
        log_forward,
        log_reverse,
        entropy_flow,
        residual: (log_forward - log_reverse - entropy_flow).abs(),
    })
}

/// `S = -ln P_f + ln P_i + beta sum omega`.
pub fn pathwise_entropy(path: &PathRecord, registry: &ChannelRegistry, beta: f64) -> Result<f64> {
    let (pi, pf) = match (path.p_initial, path.p_final) {
        (Some(a), Some(b)) if a > 0.0 && b > 0.0 => (a, b),
        _ => return Err(Error::InvalidPath("path needs positive end-point populations".into())),
    };
    Ok(pi.ln() - pf.ln() + beta * path.heat(registry))
}

/// Ensemble average of the pathwise entropy production; the second law
/// asks for `mean >= -5 stderr`.
pub fn second_law_check(paths: &[PathRecord], registry: &ChannelRegistry, beta: f64) -> Result<MeanSe> {
    let s = paths
        .iter()
        .map(|p| pathwise_entropy(p, registry, beta))
        .collect::<Result<Vec<_>>>()?;
    Ok(MeanSe::from_samples(&s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{fill_rates, RateModel};
    use crate::presets::monochromatic_preset;

    fn registry() -> ChannelRegistry {
        let p = monochromatic_preset(1.0, 0.8, 0.2).unwrap();
        fill_rates(&p.registry, &RateModel::Phenomenological { gamma0: 0.2, beta: 0.7 }).unwrap()
    }

    #[test]
    fn empty_path_is_its_own_reverse() {
        let reg = registry();
        let path = PathRecord::new((Branch::Minus, 0), vec![], 3.0);
        let f = fluctuation_residual(&path, &reg, 0.7).unwrap();
        assert_eq!(f.residual, 0.0);
    }

    #[test]
    fn reverse_returns_to_start() {
        let reg = registry();
        let jumps = (0..reg.len())
            .map(|c| PathJump {
                t: 0.5 + c as f64 * 0.1,
                channel: c,
            })
            .collect::<Vec<_>>();
        for j in jumps {
            let Ok(_) = apply_to_label(reg.channel(j.channel), (Branch::Plus, 0)) else {
                continue;
            };
            let path = PathRecord::new((Branch::Plus, 0), vec![j], 2.0);
            let rev = reverse_path(&path, &reg).unwrap();
            assert_eq!(rev.final_label(&reg).unwrap(), (Branch::Plus, 0));
            assert!(fluctuation_residual(&path, &reg, 0.7).unwrap().residual < 1e-10);
        }
    }

    #[test]
    fn wrong_label_is_rejected() {
        let reg = registry();
        let ch = reg
            .channels()
            .iter()
            .find(|c| c.entries.iter().all(|e| e.from == Branch::Plus))
            .unwrap();
        let path = PathRecord::new((Branch::Minus, 0), vec![PathJump { t: 1.0, channel: ch.id }], 2.0);
        assert!(matches!(path_log_density(&path, &reg), Err(Error::InvalidPath(_))));
    }
}
