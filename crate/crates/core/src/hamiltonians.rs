//! Rule-table constructions for long-range Hamiltonians.
//!
//! Every builder emits a [`RuleTable`] (and a compiled [`Mpo`] through the
//! convenience wrappers) with the known-exact bond dimension for its
//! interaction class: nearest-neighbor 3, fixed range r+2, fully general
//! two-body d^2(N-1)+2, coupling-matrix interactions with site-dependent
//! bonds peaking at 2 + chi*floor(N/2), exponentially decaying couplings 3
//! (open) or 4 (periodic), polynomial-times-exponential couplings with a
//! ladder of loop levels, and k-local chains k+1.

use std::collections::BTreeMap;

use crate::mpo::{Mpo, Rule, RuleTable, SiteRules};
use crate::tensor::{svd_matrix, DenseTensor, C64, ONE, ZERO};
use crate::{Error, Result};

pub fn pauli(c: char) -> DenseTensor {
    let i = C64::new(0.0, 1.0);
    let data = match c {
        'I' => vec![ONE, ZERO, ZERO, ONE],
        'X' => vec![ZERO, ONE, ONE, ZERO],
        'Y' => vec![ZERO, -i, i, ZERO],
        'Z' => vec![ONE, ZERO, ZERO, -ONE],
        _ => panic!("unknown pauli {c}"),
    };
    DenseTensor::from_data(&[2, 2], data)
}

/// |1><1| occupation projector for the two-level hard-core mapping.
pub fn number_op() -> DenseTensor {
    DenseTensor::from_data(&[2, 2], vec![ZERO, ZERO, ZERO, ONE])
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Sum of X_i Y_{i+1}; bond dimension 3.
pub fn nearest_neighbor_table(x: &DenseTensor, y: &DenseTensor) -> RuleTable {
    RuleTable::uniform(
        &["1", "2", "3"],
        vec![
            Rule::new("1", "1", ONE, DenseTensor::eye(x.shape()[0])),
            Rule::new("1", "2", ONE, x.clone()),
            Rule::new("2", "3", ONE, y.clone()),
            Rule::new("3", "3", ONE, DenseTensor::eye(x.shape()[0])),
        ],
        "1",
        "3",
    )
}

pub fn nearest_neighbor(x: &DenseTensor, y: &DenseTensor, n: usize) -> Result<Mpo> {
    nearest_neighbor_table(x, y).to_mpo(n)
}

/// Sum of X_i Y_{i+r}: only sites exactly `r` apart interact. Bond
/// dimension r+2.
pub fn fixed_range_table(x: &DenseTensor, y: &DenseTensor, r: usize, n: usize) -> Result<RuleTable> {
    if r < 1 || r > n - 1 {
        return Err(Error::Config(format!("range {r} not in 1..={}", n - 1)));
    }
    let d = x.shape()[0];
    let mut alphabet: Vec<String> = vec!["1".into()];
    for q in 1..=r {
        alphabet.push(format!("m{q}"));
    }
    alphabet.push("end".into());
    let mut rules = vec![
        Rule::new("1", "1", ONE, DenseTensor::eye(d)),
        Rule::new("1", "m1", ONE, x.clone()),
        Rule::new("end", "end", ONE, DenseTensor::eye(d)),
    ];
    for q in 1..r {
        rules.push(Rule::new(
            &format!("m{q}"),
            &format!("m{}", q + 1),
            ONE,
            DenseTensor::eye(d),
        ));
    }
    rules.push(Rule::new(&format!("m{r}"), "end", ONE, y.clone()));
    let alph: Vec<&str> = alphabet.iter().map(|s| s.as_str()).collect();
    Ok(RuleTable::uniform(&alph, rules, "1", "end"))
}

pub fn fixed_range(x: &DenseTensor, y: &DenseTensor, r: usize, n: usize) -> Result<Mpo> {
    fixed_range_table(x, y, r, n)?.to_mpo(n)
}

/// Shared-X interactions at every range 1..=r, with per-range partner
/// operators and an optional on-site term:
/// sum_i C_i + sum_{q<=r} sum_i X_i (Y_q)_{i+q}. Bond dimension r+2.
pub fn ranged_all_table(
    x: &DenseTensor,
    ys: &[DenseTensor],
    local: Option<&DenseTensor>,
    n: usize,
) -> Result<RuleTable> {
    let r = ys.len();
    if r < 1 || r > n - 1 {
        return Err(Error::Config(format!("range {r} not in 1..={}", n - 1)));
    }
    let d = x.shape()[0];
    let mut alphabet: Vec<String> = vec!["1".into()];
    for q in 1..=r {
        alphabet.push(format!("m{q}"));
    }
    alphabet.push("end".into());
    let mut rules = vec![
        Rule::new("1", "1", ONE, DenseTensor::eye(d)),
        Rule::new("1", "m1", ONE, x.clone()),
        Rule::new("end", "end", ONE, DenseTensor::eye(d)),
    ];
    if let Some(c) = local {
        rules.push(Rule::new("1", "end", ONE, c.clone()));
    }
    for q in 1..r {
        rules.push(Rule::new(
            &format!("m{q}"),
            &format!("m{}", q + 1),
            ONE,
            DenseTensor::eye(d),
        ));
    }
    for (q, y) in ys.iter().enumerate() {
        rules.push(Rule::new(&format!("m{}", q + 1), "end", ONE, y.clone()));
    }
    let alph: Vec<&str> = alphabet.iter().map(|s| s.as_str()).collect();
    Ok(RuleTable::uniform(&alph, rules, "1", "end"))
}

pub fn ranged_all(
    x: &DenseTensor,
    ys: &[DenseTensor],
    local: Option<&DenseTensor>,
    n: usize,
) -> Result<Mpo> {
    ranged_all_table(x, ys, local, n)?.to_mpo(n)
}

/// Split a two-site operator (d^2 x d^2, row index = (j1 j2)) into Schmidt
/// pairs u_s (x) v_s, dropping singular values below 1e-12 of the largest.
pub fn schmidt_pairs(h: &DenseTensor, d: usize) -> Vec<(DenseTensor, DenseTensor)> {
    assert_eq!(h.shape(), &[d * d, d * d]);
    let m = h
        .clone()
        .reshape(&[d, d, d, d])
        .permute(&[0, 2, 1, 3])
        .reshape(&[d * d, d * d]);
    let (u, s, vh) = svd_matrix(&m);
    let cut = 1e-12 * s.first().copied().unwrap_or(0.0);
    let mut pairs = Vec::new();
    for (k, &sv) in s.iter().enumerate() {
        if sv <= cut {
            break;
        }
        let w = sv.sqrt();
        let mut us = DenseTensor::zeros(&[d, d]);
        let mut vs = DenseTensor::zeros(&[d, d]);
        for a in 0..d {
            for b in 0..d {
                us.set(&[a, b], u.at(&[a * d + b, k]) * w);
                vs.set(&[a, b], vh.at(&[k, a * d + b]) * w);
            }
        }
        pairs.push((us, vs));
    }
    pairs
}

/// Completely individual two-body interactions: every pair (i, j) carries
/// its own d^2 x d^2 term. All term information is shifted leftward via
/// the operator-basis split h = sum_k E_k (x) B_k, so the bond alphabet is
/// {ready} + {(emitting site, basis index)} + {done}: D = d^2(N-1)+2.
pub fn general_two_body_table(
    h: &BTreeMap<(usize, usize), DenseTensor>,
    d: usize,
    n: usize,
) -> Result<RuleTable> {
    for (&(i, j), term) in h {
        if i >= j || j >= n {
            return Err(Error::Config(format!("pair ({i},{j}) out of range")));
        }
        if term.shape() != [d * d, d * d] {
            return Err(Error::Config(format!(
                "term ({i},{j}) is not {0}x{0}",
                d * d
            )));
        }
    }
    let mut alphabet: Vec<String> = vec!["r".into()];
    for m in 0..n - 1 {
        for k in 0..d * d {
            alphabet.push(format!("m{m}k{k}"));
        }
    }
    alphabet.push("d".into());

    let eye = DenseTensor::eye(d);
    let mut overrides = BTreeMap::new();
    for s in 0..n {
        let mut rules = vec![
            Rule::new("r", "r", ONE, eye.clone()),
            Rule::new("d", "d", ONE, eye.clone()),
        ];
        // emit the operator-basis element E_k = |a><b| at site s
        if h.keys().any(|&(i, _)| i == s) {
            for a in 0..d {
                for b in 0..d {
                    let mut e = DenseTensor::zeros(&[d, d]);
                    e.set(&[a, b], ONE);
                    rules.push(Rule::new("r", &format!("m{s}k{}", a * d + b), ONE, e));
                }
            }
        }
        // pass anything emitted earlier
        for m in 0..s.min(n - 1) {
            for k in 0..d * d {
                let lbl = format!("m{m}k{k}");
                rules.push(Rule::new(&lbl, &lbl, ONE, eye.clone()));
            }
        }
        // close pairs (i, s): partner operator B_k[j2,i2] = h[(a j2),(b i2)]
        for (&(i, j), term) in h {
            if j != s {
                continue;
            }
            for a in 0..d {
                for b in 0..d {
                    let mut bk = DenseTensor::zeros(&[d, d]);
                    for j2 in 0..d {
                        for i2 in 0..d {
                            bk.set(&[j2, i2], term.at(&[a * d + j2, b * d + i2]));
                        }
                    }
                    rules.push(Rule::new(&format!("m{i}k{}", a * d + b), "d", ONE, bk));
                }
            }
        }
        overrides.insert(s, SiteRules { left_alphabet: None, right_alphabet: None, rules });
    }
    Ok(RuleTable {
        alphabet,
        rules: vec![],
        left_boundary: "r".into(),
        right_boundary: "d".into(),
        overrides,
    })
}

pub fn general_two_body(
    h: &BTreeMap<(usize, usize), DenseTensor>,
    d: usize,
    n: usize,
) -> Result<Mpo> {
    general_two_body_table(h, d, n)?.to_mpo(n)
}

/// One interaction type h with an arbitrary real coupling matrix c_ij plus
/// optional on-site terms. The bond alphabet switches direction at the
/// middle of the chain (information slots count placed operators on the
/// short side), so bonds are site dependent with maximum 2 + chi*floor(N/2)
/// where chi is the Schmidt rank of h. Coupling constants are folded into
/// the transition-site rules.
///
/// `c` is a full n x n row-major matrix; only entries with i < j are used.
/// `locals` may be empty (none), a single operator (uniform), or one per
/// site.
pub fn fixed_type_table(
    h: &DenseTensor,
    c: &[f64],
    locals: &[DenseTensor],
    d: usize,
    n: usize,
) -> Result<RuleTable> {
    if c.len() != n * n {
        return Err(Error::Config(format!(
            "coupling matrix must be {n}x{n} row-major"
        )));
    }
    if !(locals.len() <= 1 || locals.len() == n) {
        return Err(Error::Config("locals must have length 0, 1, or n".into()));
    }
    let pairs = schmidt_pairs(h, d);
    let chi = pairs.len();
    let cij = |i: usize, j: usize| re(c[i * n + j]);
    let eye = DenseTensor::eye(d);
    // transition site: bonds to its left count placed operators from the
    // left edge, bonds to its right count pending partners to the right
    let t = n.div_ceil(2) - 1;

    let left_labels = |bond: isize| -> Vec<String> {
        // bond b sits between sites b and b+1; b = -1 is the open edge
        let mut v = vec!["r".to_string()];
        if bond >= 0 {
            for i in 0..=(bond as usize) {
                for s in 0..chi {
                    v.push(format!("p{i}s{s}"));
                }
            }
        }
        v.push("d".into());
        v
    };
    let right_labels = |bond: usize| -> Vec<String> {
        let mut v = vec!["r".to_string()];
        for j in bond + 1..n {
            for s in 0..chi {
                v.push(format!("f{j}s{s}"));
            }
        }
        v.push("d".into());
        v
    };
    let bond_labels = |bond: isize| -> Vec<String> {
        if bond < 0 || (bond as usize) < t {
            left_labels(bond)
        } else {
            right_labels(bond as usize)
        }
    };

    let mut overrides = BTreeMap::new();
    for site in 0..n {
        let la = bond_labels(site as isize - 1);
        let ra = bond_labels(site as isize);
        let mut rules = vec![
            Rule::new("r", "r", ONE, eye.clone()),
            Rule::new("d", "d", ONE, eye.clone()),
        ];
        let local = match locals.len() {
            0 => None,
            1 => Some(&locals[0]),
            _ => Some(&locals[site]),
        };
        if let Some(x) = local {
            rules.push(Rule::new("r", "d", ONE, x.clone()));
        }
        match site.cmp(&t) {
            std::cmp::Ordering::Less => {
                for (s, (u, _)) in pairs.iter().enumerate() {
                    rules.push(Rule::new("r", &format!("p{site}s{s}"), ONE, u.clone()));
                }
                for i in 0..site {
                    for (s, (_, v)) in pairs.iter().enumerate() {
                        let lbl = format!("p{i}s{s}");
                        rules.push(Rule::new(&lbl, &lbl, ONE, eye.clone()));
                        rules.push(Rule::new(&lbl, "d", cij(i, site), v.clone()));
                    }
                }
            }
            std::cmp::Ordering::Equal => {
                for j in site + 1..n {
                    for (s, (u, _)) in pairs.iter().enumerate() {
                        rules.push(Rule::new(
                            "r",
                            &format!("f{j}s{s}"),
                            cij(site, j),
                            u.clone(),
                        ));
                    }
                }
                for i in 0..site {
                    for (s, (_, v)) in pairs.iter().enumerate() {
                        rules.push(Rule::new(
                            &format!("p{i}s{s}"),
                            "d",
                            cij(i, site),
                            v.clone(),
                        ));
                        for j in site + 1..n {
                            rules.push(Rule::new(
                                &format!("p{i}s{s}"),
                                &format!("f{j}s{s}"),
                                cij(i, j),
                                eye.clone(),
                            ));
                        }
                    }
                }
            }
            std::cmp::Ordering::Greater => {
                for (s, (_, v)) in pairs.iter().enumerate() {
                    rules.push(Rule::new(&format!("f{site}s{s}"), "d", ONE, v.clone()));
                }
                for j in site + 1..n {
                    for (s, (u, _)) in pairs.iter().enumerate() {
                        rules.push(Rule::new(
                            "r",
                            &format!("f{j}s{s}"),
                            cij(site, j),
                            u.clone(),
                        ));
                        let lbl = format!("f{j}s{s}");
                        rules.push(Rule::new(&lbl, &lbl, ONE, eye.clone()));
                    }
                }
            }
        }
        overrides.insert(
            site,
            SiteRules {
                left_alphabet: Some(la),
                right_alphabet: Some(ra),
                rules,
            },
        );
    }
    Ok(RuleTable {
        alphabet: vec!["r".into(), "d".into()],
        rules: vec![],
        left_boundary: "r".into(),
        right_boundary: "d".into(),
        overrides,
    })
}

pub fn fixed_type(
    h: &DenseTensor,
    c: &[f64],
    locals: &[DenseTensor],
    d: usize,
    n: usize,
) -> Result<Mpo> {
    fixed_type_table(h, c, locals, d, n)?.to_mpo(n)
}

/// Exponentially decaying couplings c_q = beta^q (open) or
/// c_q = beta^q + beta^{N-q} (periodic rewriting; adds one label running
/// the decay backwards with inverse-beta loops). D = 3 or 4.
pub fn exp_decay_table(
    x: &DenseTensor,
    y: &DenseTensor,
    beta: f64,
    n: usize,
    periodic: bool,
) -> Result<RuleTable> {
    if beta == 0.0 {
        return Err(Error::Config("beta must be nonzero".into()));
    }
    let d = x.shape()[0];
    let eye = DenseTensor::eye(d);
    let mut rules = vec![
        Rule::new("1", "1", ONE, eye.clone()),
        Rule::new("1", "2", re(beta), x.clone()),
        Rule::new("2", "2", re(beta), eye.clone()),
        Rule::new("2", "3", ONE, y.clone()),
        Rule::new("3", "3", ONE, eye.clone()),
    ];
    if !periodic {
        return Ok(RuleTable::uniform(&["1", "2", "3"], rules, "1", "3"));
    }
    // backward branch: emit beta^a X, loop with 1/beta, close with
    // beta^b Y, a + b = N - 1, so a path of length q gets beta^{N-q}
    let a = (n / 2) as i32;
    let b = (n as i32 - 2) - a;
    rules.push(Rule::new("1", "2b", re(beta.powi(a + 1)), x.clone()));
    rules.push(Rule::new("2b", "2b", re(1.0 / beta), eye.clone()));
    rules.push(Rule::new("2b", "3", re(beta.powi(b)), y.clone()));
    Ok(RuleTable::uniform(&["1", "2", "2b", "3"], rules, "1", "3"))
}

pub fn exp_decay(
    x: &DenseTensor,
    y: &DenseTensor,
    beta: f64,
    n: usize,
    periodic: bool,
) -> Result<Mpo> {
    exp_decay_table(x, y, beta, n, periodic)?.to_mpo(n)
}

/// Exponential decay of an arbitrary two-site interaction h: the Schmidt
/// pairs of h each get their own decay track. D = chi+2 open, 2chi+2
/// periodic (2d^2+2 for a full-rank term).
pub fn exp_decay_general_table(
    h: &DenseTensor,
    beta: f64,
    d: usize,
    n: usize,
    periodic: bool,
) -> Result<RuleTable> {
    if beta == 0.0 {
        return Err(Error::Config("beta must be nonzero".into()));
    }
    let pairs = schmidt_pairs(h, d);
    let eye = DenseTensor::eye(d);
    let mut alphabet: Vec<String> = vec!["1".into()];
    let mut rules = vec![
        Rule::new("1", "1", ONE, eye.clone()),
        Rule::new("end", "end", ONE, eye.clone()),
    ];
    for (s, (u, v)) in pairs.iter().enumerate() {
        let lbl = format!("e{s}");
        alphabet.push(lbl.clone());
        rules.push(Rule::new("1", &lbl, re(beta), u.clone()));
        rules.push(Rule::new(&lbl, &lbl, re(beta), eye.clone()));
        rules.push(Rule::new(&lbl, "end", ONE, v.clone()));
    }
    if periodic {
        let a = (n / 2) as i32;
        let b = (n as i32 - 2) - a;
        for (s, (u, v)) in pairs.iter().enumerate() {
            let lbl = format!("b{s}");
            alphabet.push(lbl.clone());
            rules.push(Rule::new("1", &lbl, re(beta.powi(a + 1)), u.clone()));
            rules.push(Rule::new(&lbl, &lbl, re(1.0 / beta), eye.clone()));
            rules.push(Rule::new(&lbl, "end", re(beta.powi(b)), v.clone()));
        }
    }
    alphabet.push("end".into());
    let alph: Vec<&str> = alphabet.iter().map(|s| s.as_str()).collect();
    Ok(RuleTable::uniform(&alph, rules, "1", "end"))
}

/// Couplings c_q = sum_k b_k q^k alpha_k^q, one ladder of loop levels per
/// distinct alpha. Entering a ladder, every intermediate site either stays
/// on its level or climbs one, both with weight alpha; the exit weights
/// are chosen so the number of climb patterns (binomial counts) resums to
/// the polynomial. D = 2 + sum over distinct alphas of (max degree + 1).
pub fn poly_exp_table(
    x: &DenseTensor,
    y: &DenseTensor,
    terms: &[(f64, usize, f64)],
    n: usize,
) -> Result<RuleTable> {
    if terms.is_empty() {
        return Err(Error::Config("poly_exp needs at least one term".into()));
    }
    let _ = n;
    let d = x.shape()[0];
    let eye = DenseTensor::eye(d);
    // group by alpha, tracking the polynomial coefficients b_k
    let mut groups: Vec<(f64, Vec<f64>)> = Vec::new();
    for &(b, k, alpha) in terms {
        if alpha == 0.0 {
            return Err(Error::Config("alpha must be nonzero".into()));
        }
        let g = match groups.iter_mut().find(|(a, _)| *a == alpha) {
            Some(g) => g,
            None => {
                groups.push((alpha, vec![]));
                groups.last_mut().unwrap()
            }
        };
        if g.1.len() <= k {
            g.1.resize(k + 1, 0.0);
        }
        g.1[k] += b;
    }

    let mut alphabet: Vec<String> = vec!["1".into()];
    let mut rules = vec![
        Rule::new("1", "1", ONE, eye.clone()),
        Rule::new("end", "end", ONE, eye.clone()),
    ];
    for (gi, (alpha, poly)) in groups.iter().enumerate() {
        let deg = poly.len() - 1;
        let p = |q: f64| -> f64 {
            poly.iter()
                .enumerate()
                .map(|(k, b)| b * q.powi(k as i32))
                .sum()
        };
        // exit weights e_j from p(q) = sum_j e_j * C(q-1, j), solved by
        // evaluating at q = 1..deg+1 (triangular system)
        let mut e = vec![0.0f64; deg + 1];
        for j in 0..=deg {
            let q = (j + 1) as f64;
            let mut acc = p(q);
            for (i, ei) in e.iter().enumerate().take(j) {
                acc -= ei * binom(j, i);
            }
            e[j] = acc;
        }
        for j in 0..=deg {
            alphabet.push(format!("g{gi}l{j}"));
        }
        rules.push(Rule::new("1", &format!("g{gi}l0"), re(*alpha), x.clone()));
        for j in 0..=deg {
            let lbl = format!("g{gi}l{j}");
            rules.push(Rule::new(&lbl, &lbl, re(*alpha), eye.clone()));
            if j < deg {
                rules.push(Rule::new(
                    &lbl,
                    &format!("g{gi}l{}", j + 1),
                    re(*alpha),
                    eye.clone(),
                ));
            }
            rules.push(Rule::new(&lbl, "end", re(e[j]), y.clone()));
        }
    }
    alphabet.push("end".into());
    let alph: Vec<&str> = alphabet.iter().map(|s| s.as_str()).collect();
    Ok(RuleTable::uniform(&alph, rules, "1", "end"))
}

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

pub fn poly_exp(
    x: &DenseTensor,
    y: &DenseTensor,
    terms: &[(f64, usize, f64)],
    n: usize,
) -> Result<Mpo> {
    poly_exp_table(x, y, terms, n)?.to_mpo(n)
}

/// Connected k-local chain sum_i c_i op_1^[i] ... op_k^[i+k-1] with
/// site-dependent couplings. D = k+1.
pub fn k_body_chain_table(ops: &[DenseTensor], c: &[f64], n: usize) -> Result<RuleTable> {
    let k = ops.len();
    if k < 1 || k > n {
        return Err(Error::Config(format!("k = {k} not in 1..={n}")));
    }
    if c.len() != n + 1 - k {
        return Err(Error::Config(format!(
            "need {} couplings for k={k}, n={n}",
            n + 1 - k
        )));
    }
    let d = ops[0].shape()[0];
    let eye = DenseTensor::eye(d);
    let alphabet: Vec<String> = (0..=k).map(|j| format!("{j}")).collect();
    let mut overrides = BTreeMap::new();
    for site in 0..n {
        let mut rules = vec![
            Rule::new("0", "0", ONE, eye.clone()),
            Rule::new(&format!("{k}"), &format!("{k}"), ONE, eye.clone()),
        ];
        if site + k <= n {
            rules.push(Rule::new("0", "1", re(c[site]), ops[0].clone()));
        }
        for j in 1..k {
            rules.push(Rule::new(
                &format!("{j}"),
                &format!("{}", j + 1),
                ONE,
                ops[j].clone(),
            ));
        }
        overrides.insert(site, SiteRules { left_alphabet: None, right_alphabet: None, rules });
    }
    Ok(RuleTable {
        alphabet,
        rules: vec![],
        left_boundary: "0".into(),
        right_boundary: format!("{k}"),
        overrides,
    })
}

pub fn k_body_chain(ops: &[DenseTensor], c: &[f64], n: usize) -> Result<Mpo> {
    k_body_chain_table(ops, c, n)?.to_mpo(n)
}

// ---------------------------------------------------------------------
// concrete models

/// H = -sum ZZ - B sum X. D = 3.
pub fn ising(n: usize, b: f64) -> Result<Mpo> {
    let z = pauli('Z');
    ranged_all(
        &z,
        &[z.scale(re(-1.0))],
        Some(&pauli('X').scale(re(-b))),
        n,
    )
}

/// H = cos(theta) sum (XX + YY + Delta ZZ) + sin(theta) sum Z. D = 5.
pub fn xxz(n: usize, theta: f64, delta: f64) -> Result<Mpo> {
    let (x, y, z) = (pauli('X'), pauli('Y'), pauli('Z'));
    let ct = theta.cos();
    let eye = DenseTensor::eye(2);
    let rules = vec![
        Rule::new("1", "1", ONE, eye.clone()),
        Rule::new("1", "x", re(ct), x.clone()),
        Rule::new("x", "5", ONE, x),
        Rule::new("1", "y", re(ct), y.clone()),
        Rule::new("y", "5", ONE, y),
        Rule::new("1", "z", re(ct * delta), z.clone()),
        Rule::new("z", "5", ONE, z.clone()),
        Rule::new("1", "5", re(theta.sin()), z),
        Rule::new("5", "5", ONE, eye),
    ];
    RuleTable::uniform(&["1", "x", "y", "z", "5"], rules, "1", "5").to_mpo(n)
}

/// Hard-core Rydberg chain: on-site Omega*(r + r^dag) + delta*n, plus
/// density-density couplings beta0 / (x_k - x_j)^3. Built through the
/// coupling-matrix construction, so the exact bond peaks at 2+floor(N/2).
pub fn rydberg(
    n: usize,
    omega: f64,
    delta: f64,
    beta0: f64,
    positions: Option<&[f64]>,
) -> Result<Mpo> {
    let default: Vec<f64> = (1..=n).map(|j| j as f64).collect();
    let x = positions.unwrap_or(&default);
    if x.len() != n {
        return Err(Error::Config("positions length must equal n_sites".into()));
    }
    if x.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("positions must be strictly increasing".into()));
    }
    let nn = number_op();
    let h = crate::tensor::kron(&nn, &nn);
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            c[i * n + j] = beta0 / (x[j] - x[i]).powi(3);
        }
    }
    let local = pauli('X').scale(re(omega)).add(&nn.scale(re(delta)));
    fixed_type(&h, &c, &[local], 2, n)
}

/// H = sum J_jk Z_j Z_k + B sum X with J_jk standard normal. D peaks at
/// 2+floor(N/2).
pub fn spin_glass(n: usize, b: f64, seed: u64) -> Result<Mpo> {
    let z = pauli('Z');
    let h = crate::tensor::kron(&z, &z);
    let draws = normal_samples(seed, n * (n - 1) / 2);
    let mut c = vec![0.0; n * n];
    let mut it = draws.into_iter();
    for i in 0..n {
        for j in i + 1..n {
            c[i * n + j] = it.next().unwrap();
        }
    }
    fixed_type(&h, &c, &[pauli('X').scale(re(b))], 2, n)
}

// ---------------------------------------------------------------------
// randomness: splitmix64 + Box-Muller, fully reproducible across platforms

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn uniform01(state: &mut u64) -> f64 {
    // 53 random bits into [0, 1)
    (splitmix64(state) >> 11) as f64 * (1.0 / 9007199254740992.0)
}

/// Standard-normal samples via Box-Muller, deterministic per seed.
pub fn normal_samples(seed: u64, count: usize) -> Vec<f64> {
    let mut state = seed;
    let mut out = Vec::with_capacity(count + 1);
    while out.len() < count {
        let u1 = (1.0 - uniform01(&mut state)).max(f64::MIN_POSITIVE);
        let u2 = uniform01(&mut state);
        let r = (-2.0 * u1.ln()).sqrt();
        out.push(r * (std::f64::consts::TAU * u2).cos());
        out.push(r * (std::f64::consts::TAU * u2).sin());
    }
    out.truncate(count);
    out
}

/// Randomized site locations x_j = j + sigma * r_j with r_j standard
/// normal.
pub fn randomize_positions(n: usize, sigma: f64, seed: u64) -> Vec<f64> {
    normal_samples(seed, n)
        .into_iter()
        .enumerate()
        .map(|(j, r)| (j + 1) as f64 + sigma * r)
        .collect()
}
