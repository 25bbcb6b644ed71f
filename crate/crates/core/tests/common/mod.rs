#![allow(dead_code)]

use hdsign::distributions::{sample, DistributionSpec, Family, RngStream, ScatterSpec};
use hdsign::{SampleMatrix, WeightFunction};

pub fn gaussian(n: usize, p: usize, seed: u64) -> SampleMatrix {
    let spec = DistributionSpec::centered(Family::Normal, ScatterSpec::identity(p).unwrap()).unwrap();
    sample(&spec, n, &RngStream::new(seed, 0)).unwrap()
}

pub fn named_weights() -> Vec<WeightFunction> {
    vec![WeightFunction::Os, WeightFunction::Ss, WeightFunction::Cq]
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sign(x: &[f64]) -> (f64, Vec<f64>) {
    let r = dot(x, x).sqrt();
    if r <= 1e-12 * (x.len() as f64).sqrt() {
        (r, vec![0.0; x.len()])
    } else {
        (r, x.iter().map(|v| v / r).collect())
    }
}

/// Explicit pair sum for the weighted sign statistic.
pub fn naive_statistic(x: &SampleMatrix, k: &WeightFunction) -> f64 {
    let n = x.n();
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let (ri, ui) = sign(x.row(i));
            let (rj, uj) = sign(x.row(j));
            if ui.iter().all(|v| *v == 0.0) || uj.iter().all(|v| *v == 0.0) {
                continue;
            }
            total += k.eval(ri) * k.eval(rj) * dot(&ui, &uj);
        }
    }
    2.0 * total / (n as f64 * (n as f64 - 1.0))
}

/// Triple loop: the leave-two-out sign mean is rebuilt for every ordered pair.
pub fn naive_variance(x: &SampleMatrix, k: &WeightFunction) -> f64 {
    let (n, p) = (x.n(), x.p());
    let signs: Vec<(f64, Vec<f64>)> = x.rows().map(sign).collect();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let mut mean = vec![0.0; p];
            for (m, (_, u)) in signs.iter().enumerate() {
                if m != i && m != j {
                    for t in 0..p {
                        mean[t] += u[t] / (n as f64 - 2.0);
                    }
                }
            }
            let (ri, ui) = &signs[i];
            let (rj, uj) = &signs[j];
            let di: Vec<f64> = ui.iter().zip(&mean).map(|(a, b)| a - b).collect();
            let dj: Vec<f64> = uj.iter().zip(&mean).map(|(a, b)| a - b).collect();
            let wi = k.eval(*ri).powi(2);
            let wj = k.eval(*rj).powi(2);
            total += wi * wj * dot(&di, uj) * dot(&dj, ui);
        }
    }
    2.0 * total / (n as f64).powi(4)
}

pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}
