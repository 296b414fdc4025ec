//! Fitting coupling functions by sums of exponentials,
//! f(q) ~ sum_i lambda_i beta_i^q, and the constant-bond-dimension MPOs
//! they generate, including the inhomogeneous per-bond variant for
//! non-integer site positions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mpo::{Mpo, Rule, RuleTable, SiteRules};
use crate::tensor::{eigenvalues, DenseTensor, C64, ONE};
use crate::{Error, Result};

const BETA_CAP: f64 = 1.5;

#[derive(Debug, Clone, PartialEq)]
pub struct ExpSum {
    /// (lambda_i, beta_i) pairs.
    pub terms: Vec<(f64, f64)>,
}

impl ExpSum {
    pub fn eval(&self, q: f64) -> f64 {
        self.terms.iter().map(|&(l, b)| l * b.powf(q)).sum()
    }

    fn eval_int(&self, q: usize) -> f64 {
        self.terms.iter().map(|&(l, b)| l * b.powi(q as i32)).sum()
    }
}

#[derive(Debug, Clone)]
pub struct ExpFit {
    pub expsum: ExpSum,
    /// Root-mean-square misfit over q = 1..=q_max.
    pub residual: f64,
    /// False when the optimizer returned its best iterate without meeting
    /// the gradient tolerance.
    pub converged: bool,
}

fn rms(samples: &[f64], es: &ExpSum) -> f64 {
    let m2: f64 = samples
        .iter()
        .enumerate()
        .map(|(k, &f)| {
            let r = es.eval_int(k + 1) - f;
            r * r
        })
        .sum();
    (m2 / samples.len() as f64).sqrt()
}

/// Solve a small dense real system by Gaussian elimination with partial
/// pivoting. Returns None when singular to working precision.
fn solve_real(mut a: Vec<f64>, mut b: Vec<f64>, k: usize) -> Option<Vec<f64>> {
    for col in 0..k {
        let (piv, &pv) = a[col * k + col..]
            .iter()
            .step_by(k)
            .enumerate()
            .max_by(|x, y| x.1.abs().partial_cmp(&y.1.abs()).unwrap())?;
        if pv.abs() < 1e-300 {
            return None;
        }
        let piv = piv + col;
        if piv != col {
            for j in 0..k {
                a.swap(col * k + j, piv * k + j);
            }
            b.swap(col, piv);
        }
        for row in col + 1..k {
            let f = a[row * k + col] / a[col * k + col];
            for j in col..k {
                a[row * k + j] -= f * a[col * k + j];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; k];
    for row in (0..k).rev() {
        let mut acc = b[row];
        for j in row + 1..k {
            acc -= a[row * k + j] * x[j];
        }
        x[row] = acc / a[row * k + row];
    }
    Some(x)
}

/// Least-squares solve of an overdetermined system via normal equations.
fn lstsq(rows: &[Vec<f64>], rhs: &[f64], k: usize) -> Option<Vec<f64>> {
    let mut ata = vec![0.0; k * k];
    let mut atb = vec![0.0; k];
    for (row, &y) in rows.iter().zip(rhs) {
        for i in 0..k {
            atb[i] += row[i] * y;
            for j in 0..k {
                ata[i * k + j] += row[i] * row[j];
            }
        }
    }
    solve_real(ata, atb, k)
}

/// Linear-prediction (Prony) pole estimates from a sampled sequence.
fn prony_poles(samples: &[f64], m: usize) -> Vec<f64> {
    let q = samples.len();
    if q < 2 * m {
        return vec![];
    }
    let rows: Vec<Vec<f64>> = (0..q - m).map(|s| samples[s..s + m].to_vec()).collect();
    let rhs: Vec<f64> = (0..q - m).map(|s| -samples[s + m]).collect();
    let Some(a) = lstsq(&rows, &rhs, m) else {
        return vec![];
    };
    // roots of z^m + a_{m-1} z^{m-1} + ... + a_0 via the companion matrix
    let mut comp = DenseTensor::zeros(&[m, m]);
    for i in 1..m {
        comp.set(&[i, i - 1], ONE);
    }
    for i in 0..m {
        comp.set(&[i, m - 1], C64::new(-a[i], 0.0));
    }
    eigenvalues(&comp)
        .into_iter()
        .filter(|z| z.im.abs() < 1e-8 * z.re.abs().max(1.0))
        .map(|z| z.re)
        .filter(|b| b.abs() < BETA_CAP && b.abs() > 1e-12)
        .collect()
}

/// Best lambdas for fixed betas (linear least squares).
fn refit_lambdas(samples: &[f64], betas: &[f64]) -> Vec<f64> {
    let k = betas.len();
    let rows: Vec<Vec<f64>> = (1..=samples.len())
        .map(|q| betas.iter().map(|b| b.powi(q as i32)).collect())
        .collect();
    lstsq(&rows, samples, k).unwrap_or_else(|| vec![0.0; k])
}

/// Damped Gauss-Newton on (lambda, beta) jointly; only accepts downhill
/// steps, so the residual never increases past the initial guess.
fn refine(samples: &[f64], init: ExpSum, max_iter: usize) -> (ExpSum, bool) {
    let qn = samples.len();
    let m = init.terms.len();
    let k = 2 * m;
    let mut cur = init;
    let mut best = rms(samples, &cur);
    let mut mu = 1e-6;
    let mut converged = false;
    for _ in 0..max_iter {
        // residuals and Jacobian of r_q = model(q) - f(q)
        let mut jt_r = vec![0.0; k];
        let mut jt_j = vec![0.0; k * k];
        let mut grad_norm = 0.0f64;
        for (idx, &f) in samples.iter().enumerate() {
            let q = idx + 1;
            let r = cur.eval_int(q) - f;
            let mut row = vec![0.0; k];
            for (i, &(l, b)) in cur.terms.iter().enumerate() {
                row[i] = b.powi(q as i32);
                row[m + i] = l * q as f64 * b.powi(q as i32 - 1);
            }
            for i in 0..k {
                jt_r[i] += row[i] * r;
                for j in 0..k {
                    jt_j[i * k + j] += row[i] * row[j];
                }
            }
        }
        for g in &jt_r {
            grad_norm += g * g;
        }
        let scale = best.max(1e-30) * (qn as f64).sqrt();
        if grad_norm.sqrt() <= 1e-10 * scale.max(1.0) {
            converged = true;
            break;
        }
        let mut improved = false;
        for _ in 0..25 {
            let mut lhs = jt_j.clone();
            for i in 0..k {
                lhs[i * k + i] += mu * (1.0 + jt_j[i * k + i]);
            }
            let rhs: Vec<f64> = jt_r.iter().map(|x| -x).collect();
            if let Some(step) = solve_real(lhs, rhs, k) {
                let mut trial = cur.clone();
                let mut legal = true;
                for (i, t) in trial.terms.iter_mut().enumerate() {
                    t.0 += step[i];
                    t.1 += step[m + i];
                    if t.1.abs() >= BETA_CAP {
                        legal = false;
                    }
                }
                if legal {
                    let r = rms(samples, &trial);
                    if r < best {
                        cur = trial;
                        best = r;
                        mu = (mu / 3.0).max(1e-14);
                        improved = true;
                        break;
                    }
                }
            }
            mu *= 10.0;
            if mu > 1e14 {
                break;
            }
        }
        if !improved {
            converged = grad_norm.sqrt() <= 1e-6 * scale.max(1.0);
            break;
        }
    }
    (cur, converged)
}

/// Fit `n` exponentials to f(1..=q_max), building the model one term at a
/// time: each stage starts from the previous fit plus a pole estimated
/// from its residual, which makes the final residual non-increasing in n.
pub fn fit_exp_sum<F>(f: F, q_max: usize, n: usize, seed: u64) -> Result<ExpFit>
where
    F: Fn(usize) -> f64,
{
    if n < 1 {
        return Err(Error::Config("need at least one exponential".into()));
    }
    if q_max < 2 * n {
        return Err(Error::Config(format!(
            "q_max = {q_max} too small for n = {n} (need 2n samples)"
        )));
    }
    let samples: Vec<f64> = (1..=q_max).map(f).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cur = ExpSum { terms: vec![] };
    let mut converged = true;
    for m in 1..=n {
        let resid: Vec<f64> = samples
            .iter()
            .enumerate()
            .map(|(k, &v)| v - cur.eval_int(k + 1))
            .collect();
        // candidate poles: from the residual, from a joint Prony of the
        // full sequence, and seeded random fallbacks
        let mut cands = prony_poles(&resid, 1);
        cands.extend(prony_poles(&samples, m));
        for _ in 0..8 {
            cands.push(rng.gen_range(-0.99..0.99));
        }
        let mut best: Option<(ExpSum, f64, bool)> = None;
        for mut b_new in cands {
            // keep betas distinct
            while cur.terms.iter().any(|&(_, b)| (b - b_new).abs() < 1e-7) {
                b_new += 1e-4;
            }
            if b_new.abs() >= BETA_CAP {
                continue;
            }
            let mut betas: Vec<f64> = cur.terms.iter().map(|&(_, b)| b).collect();
            betas.push(b_new);
            let lambdas = refit_lambdas(&samples, &betas);
            let init = ExpSum {
                terms: lambdas.into_iter().zip(betas.iter().copied()).collect(),
            };
            let (refined, ok) = refine(&samples, init, 200);
            let r = rms(&samples, &refined);
            if best.as_ref().map_or(true, |(_, br, _)| r < *br) {
                best = Some((refined, r, ok));
            }
        }
        let (sum, _, ok) = best.ok_or_else(|| {
            Error::NoConvergence("no admissible pole candidates".into())
        })?;
        cur = sum;
        converged = ok;
    }
    Ok(ExpFit {
        residual: rms(&samples, &cur),
        expsum: cur,
        converged,
    })
}

/// MPO for couplings c_q = sum_i lambda_i beta_i^q between X_i and Y_j.
/// One decay track per exponential: D = n + 2.
pub fn expsum_mpo_table(es: &ExpSum, x: &DenseTensor, y: &DenseTensor) -> Result<RuleTable> {
    if es.terms.is_empty() {
        return Err(Error::Config("empty exponential sum".into()));
    }
    let d = x.shape()[0];
    let eye = DenseTensor::eye(d);
    let mut alphabet: Vec<String> = vec!["1".into()];
    let mut rules = vec![
        Rule::new("1", "1", ONE, eye.clone()),
        Rule::new("end", "end", ONE, eye.clone()),
    ];
    for (i, &(l, b)) in es.terms.iter().enumerate() {
        let lbl = format!("e{i}");
        alphabet.push(lbl.clone());
        rules.push(Rule::new("1", &lbl, C64::new(l * b, 0.0), x.clone()));
        rules.push(Rule::new(&lbl, &lbl, C64::new(b, 0.0), eye.clone()));
        rules.push(Rule::new(&lbl, "end", ONE, y.clone()));
    }
    alphabet.push("end".into());
    let alph: Vec<&str> = alphabet.iter().map(|s| s.as_str()).collect();
    Ok(RuleTable::uniform(&alph, rules, "1", "end"))
}

pub fn expsum_mpo(es: &ExpSum, x: &DenseTensor, y: &DenseTensor, n: usize) -> Result<Mpo> {
    expsum_mpo_table(es, x, y)?.to_mpo(n)
}

/// Inhomogeneous variant: couplings c_jk = sum_i lambda_i beta_i^{x_k-x_j}
/// for arbitrary strictly increasing positions, realized by raising each
/// loop weight to the local gap x_t - x_{t-1}. Needs beta > 0.
pub fn expsum_mpo_inhomogeneous(
    es: &ExpSum,
    x: &DenseTensor,
    y: &DenseTensor,
    positions: &[f64],
) -> Result<Mpo> {
    if es.terms.is_empty() {
        return Err(Error::Config("empty exponential sum".into()));
    }
    if positions.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("positions must be strictly increasing".into()));
    }
    if es.terms.iter().any(|&(_, b)| b <= 0.0) {
        return Err(Error::Config(
            "inhomogeneous couplings need positive beta (real exponents)".into(),
        ));
    }
    let n = positions.len();
    let d = x.shape()[0];
    let eye = DenseTensor::eye(d);
    let mut alphabet: Vec<String> = vec!["1".into()];
    for i in 0..es.terms.len() {
        alphabet.push(format!("e{i}"));
    }
    alphabet.push("end".into());

    let mut overrides = std::collections::BTreeMap::new();
    for site in 0..n {
        let gap_right = if site + 1 < n {
            positions[site + 1] - positions[site]
        } else {
            0.0
        };
        let mut rules = vec![
            Rule::new("1", "1", ONE, eye.clone()),
            Rule::new("end", "end", ONE, eye.clone()),
        ];
        for (i, &(l, b)) in es.terms.iter().enumerate() {
            let lbl = format!("e{i}");
            if site + 1 < n {
                rules.push(Rule::new(
                    "1",
                    &lbl,
                    C64::new(l * b.powf(gap_right), 0.0),
                    x.clone(),
                ));
                rules.push(Rule::new(
                    &lbl,
                    &lbl,
                    C64::new(b.powf(gap_right), 0.0),
                    eye.clone(),
                ));
            }
            rules.push(Rule::new(&lbl, "end", ONE, y.clone()));
        }
        overrides.insert(site, SiteRules { left_alphabet: None, right_alphabet: None, rules });
    }
    RuleTable {
        alphabet,
        rules: vec![],
        left_boundary: "1".into(),
        right_boundary: "end".into(),
        overrides,
    }
    .to_mpo(n)
}
