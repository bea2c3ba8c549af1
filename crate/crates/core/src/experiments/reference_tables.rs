//! Published values of the eight reference tables, labelled like the presets' output.

use super::{hurst_label, theta_label, ExperimentKind, TableReport};
use crate::error::{Error, Result};
use crate::fbm::HurstParam;

fn h_label(h: f64) -> String {
    hurst_label(HurstParam::new(h).expect("valid"))
}

fn rows_of(values: &[&[f64]]) -> Vec<Vec<Option<f64>>> {
    values.iter().map(|r| r.iter().map(|&v| Some(v)).collect()).collect()
}

const ALL_H: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
const ALG1_THETA: [f64; 9] = [-0.1, -0.05, 0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3];

fn rejection(
    kind: ExperimentKind,
    blocks: &[(f64, &[f64])],
    theta: &[f64],
    values: &[&[f64]],
) -> Result<TableReport> {
    let rows = blocks
        .iter()
        .flat_map(|&(h, ts)| ts.iter().map(move |t| format!("{},t={t}", h_label(h))))
        .collect();
    let cols = theta.iter().map(|&th| theta_label(th)).collect();
    TableReport::from_values(kind, 1000, rows, cols, rows_of(values))
}

fn estimator(values: [[[f64; 6]; 2]; 5], theta: f64) -> Result<TableReport> {
    let hs = [0.1, 0.3, 0.5, 0.7, 0.9];
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for (h, [mean, sd]) in hs.iter().zip(values) {
        rows.push(format!("{},{},mean", h_label(*h), theta_label(theta)));
        rows.push(format!("{},{},sd", h_label(*h), theta_label(theta)));
        cells.push(mean.iter().map(|&v| Some(v)).collect());
        cells.push(sd.iter().map(|&v| Some(v)).collect());
    }
    let cols = [10, 50, 100, 200, 500, 1000].iter().map(|n| format!("n={n}")).collect();
    TableReport::from_values(ExperimentKind::EstimatorQuality, 100, rows, cols, cells)
}

/// Published table `name` (`table1` … `table8`).
pub fn reference_table(name: &str) -> Result<TableReport> {
    use ExperimentKind::*;
    let h_cols = || ALL_H.iter().map(|&h| h_label(h)).collect::<Vec<_>>();
    match name {
        "table1" => TableReport::from_values(
            ThresholdT0,
            1,
            vec!["alpha=0.01".into(), "alpha=0.05".into()],
            h_cols(),
            rows_of(&[
                &[1.2157, 1.2313, 1.2492, 1.2699, 1.2940, 1.3224, 1.3561, 1.3968, 1.4462],
                &[1.5310, 1.2373, 1.1526, 1.1124, 1.0889, 1.0736, 1.0627, 1.0547, 1.0485],
            ]),
        ),
        "table2" => TableReport::from_values(
            ThresholdT0Tilde,
            1,
            ["0.1", "0.05", "0.01", "0.001", "0"].iter().map(|t| format!("theta0={t}")).collect(),
            h_cols(),
            rows_of(&[
                &[32.43, 32.67, 31.99, 30.59, 28.66, 26.38, 23.90, 21.39, 18.95],
                &[65.24, 64.72, 61.73, 57.08, 51.41, 45.23, 38.97, 33.00, 27.62],
                &[326.47, 307.43, 271.64, 227.99, 181.64, 137.06, 98.76, 69.62, 49.41],
                &[3193.6, 2719.1, 2073.5, 1387.8, 778.9, 382.1, 189.7, 104.1, 63.6],
                &[2.34e16, 1.53e8, 285_900.0, 12_364.1, 1878.1, 534.7, 218.0, 111.2, 65.9],
            ]),
        ),
        "table3" => {
            let ts: &[f64] = &[20.0, 40.0, 60.0, 80.0, 100.0];
            rejection(
                RejectionAlg1,
                &[(0.3, ts), (0.7, ts)],
                &ALG1_THETA,
                &[
                    &[0.000, 0.003, 0.043, 0.341, 0.701, 0.880, 0.973, 0.982, 0.996],
                    &[0.000, 0.000, 0.043, 0.675, 0.952, 0.995, 0.999, 1.000, 1.000],
                    &[0.000, 0.000, 0.039, 0.860, 0.994, 1.000, 1.000, 1.000, 1.000],
                    &[0.000, 0.000, 0.048, 0.940, 1.000, 1.000, 1.000, 1.000, 1.000],
                    &[0.000, 0.000, 0.049, 0.986, 1.000, 1.000, 1.000, 1.000, 1.000],
                    &[0.000, 0.001, 0.058, 0.284, 0.540, 0.800, 0.910, 0.967, 0.979],
                    &[0.000, 0.000, 0.050, 0.581, 0.889, 0.984, 0.998, 1.000, 1.000],
                    &[0.000, 0.000, 0.042, 0.782, 0.980, 1.000, 0.999, 1.000, 1.000],
                    &[0.000, 0.000, 0.047, 0.908, 0.995, 1.000, 1.000, 1.000, 1.000],
                    &[0.000, 0.000, 0.048, 0.959, 1.000, 1.000, 1.000, 1.000, 1.000],
                ],
            )
        }
        "table4" => rejection(
            RejectionMoers,
            &[(0.7, &[20.0, 40.0, 60.0, 80.0, 100.0])],
            &ALG1_THETA,
            &[
                &[0.001, 0.013, 0.085, 0.370, 0.706, 0.873, 0.947, 0.976, 0.992],
                &[0.000, 0.004, 0.095, 0.682, 0.948, 0.993, 0.999, 1.000, 1.000],
                &[0.000, 0.002, 0.092, 0.881, 0.995, 1.000, 1.000, 1.000, 1.000],
                &[0.000, 0.000, 0.105, 0.948, 0.999, 1.000, 1.000, 1.000, 1.000],
                &[0.000, 0.000, 0.089, 0.977, 1.000, 1.000, 1.000, 1.000, 1.000],
            ],
        ),
        "table5" => rejection(
            RejectionAlg2,
            &[(0.3, &[32.0, 33.0, 34.0, 35.0, 36.0]), (0.7, &[25.0, 30.0, 35.0, 40.0, 45.0])],
            &[-0.4, -0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3],
            &[
                &[0.999, 0.996, 0.985, 0.961, 0.626, 0.052, 0.001, 0.000],
                &[0.999, 0.999, 0.997, 0.978, 0.667, 0.046, 0.000, 0.000],
                &[0.999, 0.998, 0.994, 0.989, 0.721, 0.042, 0.001, 0.000],
                &[1.000, 1.000, 0.999, 0.992, 0.764, 0.047, 0.000, 0.000],
                &[1.000, 1.000, 1.000, 1.000, 0.805, 0.048, 0.000, 0.000],
                &[0.954, 0.936, 0.798, 0.598, 0.255, 0.030, 0.003, 0.000],
                &[0.998, 0.994, 0.959, 0.817, 0.363, 0.039, 0.003, 0.000],
                &[1.000, 1.000, 1.000, 0.969, 0.513, 0.043, 0.003, 0.000],
                &[1.000, 1.000, 1.000, 1.000, 0.732, 0.047, 0.001, 0.000],
                &[1.000, 1.000, 1.000, 1.000, 0.906, 0.046, 0.000, 0.000],
            ],
        ),
        "table6" => rejection(
            RejectionAlg2,
            &[(0.7, &[40.0, 50.0, 60.0, 70.0, 80.0])],
            &[-0.35, -0.3, -0.25, -0.2, -0.15, -0.1, -0.05, 0.0, 0.05, 0.1, 0.15],
            &[
                &[0.904, 0.893, 0.842, 0.773, 0.661, 0.566, 0.368, 0.149, 0.051, 0.007, 0.000],
                &[0.999, 0.991, 0.978, 0.948, 0.901, 0.793, 0.555, 0.209, 0.053, 0.003, 0.000],
                &[1.000, 1.000, 0.999, 1.000, 0.990, 0.955, 0.799, 0.346, 0.047, 0.002, 0.000],
                &[1.000, 1.000, 1.000, 1.000, 1.000, 0.999, 0.964, 0.504, 0.045, 0.001, 0.000],
                &[1.000, 1.000, 1.000, 1.000, 1.000, 1.000, 0.999, 0.719, 0.044, 0.001, 0.000],
            ],
        ),
        "table7" => estimator(
            [
                [
                    [-0.7417, -0.8550, -0.9308, -0.9619, -0.9805, -0.9878],
                    [0.83493, 0.25492, 0.19887, 0.14314, 0.08914, 0.06096],
                ],
                [
                    [-0.9434, -0.9940, -0.9875, -0.9913, -0.9856, -0.9941],
                    [0.46723, 0.19727, 0.14965, 0.11490, 0.06408, 0.04367],
                ],
                [
                    [-1.1299, -1.0288, -1.0168, -1.0118, -0.9990, -0.9980],
                    [0.50298, 0.23068, 0.15288, 0.10412, 0.06861, 0.04729],
                ],
                [
                    [-1.2482, -1.0634, -1.0309, -1.0096, -0.9954, -0.9963],
                    [0.54527, 0.22771, 0.16644, 0.11165, 0.07714, 0.05332],
                ],
                [
                    [-1.4098, -1.2191, -1.1654, -1.1007, -1.0701, -1.0621],
                    [0.54264, 0.39257, 0.32444, 0.27009, 0.23992, 0.19265],
                ],
            ],
            -1.0,
        ),
        "table8" => {
            let tail = [1.02001, 1.00981, 1.00476, 1.00175, 1.00075];
            let row = |first: f64| {
                let mut r = [first; 6];
                r[1..].copy_from_slice(&tail);
                r
            };
            let sd = |first: f64, rest: [f64; 3]| [first, rest[0], rest[1], rest[2], 0.0, 0.0];
            estimator(
                [
                    [row(1.10671), sd(1.7356e-4, [2.3711e-15, 2.0606e-15, 2.4239e-15])],
                    [row(1.10673), sd(1.8528e-4, [2.3656e-15, 2.2042e-15, 2.6221e-15])],
                    [row(1.10671), sd(3.5147e-4, [2.5233e-15, 2.3291e-15, 2.4917e-15])],
                    [row(1.10665), sd(1.4344e-3, [2.3801e-15, 2.0968e-15, 2.1345e-15])],
                    [row(1.10633), sd(4.1894e-3, [2.2577e-15, 2.1988e-15, 2.4117e-15])],
                ],
                1.0,
            )
        }
        other => Err(Error::Config(format!("no reference values for `{other}`"))),
    }
}
