use super::{ExperimentKind, ExperimentSpec, MarginalMode};
use crate::error::{Error, Result};
use crate::fbm::HurstParam;
use crate::marginals::Probability;

/// Seed used by every preset unless overridden.
pub const DEFAULT_SEED: u64 = 2024;

const TABLE_NAMES: [&str; 8] = [
    "table1", "table2", "table3", "table4", "table5", "table6", "table7", "table8",
];

pub fn preset_names() -> &'static [&'static str] {
    &TABLE_NAMES
}

fn hursts(values: &[f64]) -> Vec<HurstParam> {
    values.iter().map(|&h| HurstParam::new(h).expect("valid preset H")).collect()
}

fn base(kind: ExperimentKind, hurst: &[f64]) -> ExperimentSpec {
    ExperimentSpec {
        kind,
        hurst_grid: hursts(hurst),
        theta_grid: Vec::new(),
        time_grid: Vec::new(),
        alpha: Probability::new(0.05).expect("valid"),
        x0: 1.0,
        replications: 1000,
        step: 1e-4,
        seed: DEFAULT_SEED,
        marginal_mode: MarginalMode::EulerPath,
        m_exponent: None,
        theta0: None,
        search_max_t: None,
        moers_quantile: None,
    }
}

const ALL_H: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
const ODD_H: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
const ALG1_THETA: [f64; 9] = [-0.1, -0.05, 0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3];
const ALG1_T: [f64; 5] = [20.0, 40.0, 60.0, 80.0, 100.0];

/// Specs reproducing a named table; tables with several blocks yield one spec per block.
pub fn preset(name: &str) -> Result<Vec<ExperimentSpec>> {
    use ExperimentKind::*;
    let specs = match name {
        "table1" => [0.01, 0.05]
            .iter()
            .map(|&a| ExperimentSpec {
                alpha: Probability::new(a).expect("valid"),
                replications: 1,
                ..base(ThresholdT0, &ALL_H)
            })
            .collect(),
        "table2" => [0.1, 0.05, 0.01, 0.001, 0.0]
            .iter()
            .map(|&t0| ExperimentSpec {
                theta0: Some(t0),
                replications: 1,
                // Guards for θ₀ = 0 reach ~1e16 at small H.
                search_max_t: (t0 == 0.0).then_some(1e18),
                ..base(ThresholdT0Tilde, &ALL_H)
            })
            .collect(),
        "table3" => vec![ExperimentSpec {
            theta_grid: ALG1_THETA.to_vec(),
            time_grid: ALG1_T.to_vec(),
            ..base(RejectionAlg1, &[0.3, 0.7])
        }],
        "table4" => vec![ExperimentSpec {
            theta_grid: ALG1_THETA.to_vec(),
            time_grid: ALG1_T.to_vec(),
            step: 1.0 / 2000.0,
            ..base(RejectionMoers, &[0.7])
        }],
        "table5" => {
            let theta = vec![-0.4, -0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3];
            vec![
                ExperimentSpec {
                    theta_grid: theta.clone(),
                    time_grid: vec![32.0, 33.0, 34.0, 35.0, 36.0],
                    theta0: Some(0.1),
                    ..base(RejectionAlg2, &[0.3])
                },
                ExperimentSpec {
                    theta_grid: theta,
                    time_grid: vec![25.0, 30.0, 35.0, 40.0, 45.0],
                    theta0: Some(0.1),
                    ..base(RejectionAlg2, &[0.7])
                },
            ]
        }
        "table6" => vec![ExperimentSpec {
            theta_grid: vec![-0.35, -0.3, -0.25, -0.2, -0.15, -0.1, -0.05, 0.0, 0.05, 0.1, 0.15],
            time_grid: vec![40.0, 50.0, 60.0, 70.0, 80.0],
            theta0: Some(0.05),
            ..base(RejectionAlg2, &[0.7])
        }],
        "table7" | "table8" => vec![ExperimentSpec {
            theta_grid: vec![if name == "table7" { -1.0 } else { 1.0 }],
            time_grid: vec![10.0, 50.0, 100.0, 200.0, 500.0, 1000.0],
            m_exponent: Some(2),
            replications: 100,
            step: 1.0 / 2000.0,
            ..base(EstimatorQuality, &ODD_H)
        }],
        other => {
            return Err(Error::Config(format!(
                "unknown table `{other}`; expected one of {}",
                TABLE_NAMES.join(", ")
            )))
        }
    };
    Ok(specs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for name in preset_names() {
            for spec in preset(name).unwrap() {
                spec.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
            }
        }
        assert!(matches!(preset("table9"), Err(Error::Config(_))));
    }
}
