//! PEPO constructions on square grids from 2D automaton rule tables:
//! nearest-neighbor couplings and generic long-range two-body sums, the
//! latter in a linear-extent and a square-root-extent encoding.

use std::collections::BTreeMap;

use crate::error::Error;
use crate::tensor::{DenseTensor, C64};
use crate::Result;

use super::{pepo_from_rules_2d, Boundary2D, Pepo, Rule2D, RuleTable2D};

const ONE: C64 = C64::new(1.0, 0.0);

fn eye(d: usize) -> DenseTensor {
    DenseTensor::eye(d)
}

/// Sum of x_i x_j over all horizontally and vertically adjacent site
/// pairs of an `grid_n` x `grid_n` grid.
///
/// All columns but the last act as branches that report finished couplings
/// rightward; the last column is a stem whose vertical bond flips from a
/// "before" to an "after" state exactly once, so precisely one coupling
/// fires per automaton path. Horizontal bonds have extent 3, vertical
/// bonds extent 2 in branch columns and 3 in the stem column.
pub fn pepo_nearest_neighbor(x: &DenseTensor, grid_n: usize) -> Result<Pepo> {
    pepo_from_rules_2d(&nearest_neighbor_table(x, grid_n, grid_n)?)
}

/// Rule table of the nearest-neighbor construction for a general
/// `rows` x `cols` grid; exposed so rectangular grids can be built in tests
/// of the boundary contraction.
pub fn nearest_neighbor_table(x: &DenseTensor, rows: usize, cols: usize) -> Result<RuleTable2D> {
    if x.rank() != 2 || x.shape()[0] != x.shape()[1] {
        return Err(Error::Shape("coupling operator must be a square matrix".into()));
    }
    if rows < 2 || cols < 2 {
        return Err(Error::Config("nearest-neighbor grid needs at least two rows".into()));
    }
    let d = x.shape()[0];
    let id = eye(d);
    // branch: p pending, w mid horizontal pair, f finished; vertical z idle,
    // s mid vertical pair
    let branch = vec![
        Rule2D::new("p", "p", "z", "z", ONE, id.clone()),
        Rule2D::new("p", "w", "z", "z", ONE, x.clone()),
        Rule2D::new("w", "f", "z", "z", ONE, x.clone()),
        Rule2D::new("p", "f", "z", "s", ONE, x.clone()),
        Rule2D::new("p", "p", "s", "z", ONE, x.clone()),
        Rule2D::new("f", "f", "z", "z", ONE, id.clone()),
    ];
    // stem: vertical B before the flip, A after, S mid vertical pair
    let stem = vec![
        Rule2D::new("p", "p", "B", "B", ONE, id.clone()),
        Rule2D::new("p", "p", "A", "A", ONE, id.clone()),
        Rule2D::new("f", "p", "B", "A", ONE, id.clone()),
        Rule2D::new("w", "p", "B", "A", ONE, x.clone()),
        Rule2D::new("p", "p", "B", "S", ONE, x.clone()),
        Rule2D::new("p", "p", "S", "A", ONE, x.clone()),
    ];
    let mut site_rules = Vec::with_capacity(rows * cols);
    for _r in 0..rows {
        for c in 0..cols {
            site_rules.push(if c == cols - 1 { stem.clone() } else { branch.clone() });
        }
    }
    let mut top: Vec<String> = vec!["z".into(); cols];
    let mut bottom: Vec<String> = vec!["z".into(); cols];
    top[cols - 1] = "B".into();
    bottom[cols - 1] = "A".into();
    let mut v_by_col = BTreeMap::new();
    v_by_col.insert(cols - 1, vec!["A".to_string(), "B".to_string(), "S".to_string()]);
    Ok(RuleTable2D {
        rows,
        cols,
        d,
        h_labels: vec!["f".into(), "p".into(), "w".into()],
        v_labels: vec!["s".into(), "z".into()],
        v_labels_by_col: v_by_col,
        site_rules,
        boundary: Boundary2D {
            left: vec!["p".into(); rows],
            right: vec!["p".into(); rows],
            top,
            bottom,
        },
    })
}

/// Bond-extent scaling of the long-range construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LongRangeMode {
    /// Horizontal alphabet linear in the grid side.
    Linear,
    /// Horizontal alphabet 2L+6, vertical L+6, with L the ceiling of the
    /// square root of the maximum coupling distance.
    Sqrt,
}

/// Sum of c(i,j) x_i y_j over raster-ordered site pairs i < j of an
/// `grid_n` x `grid_n` grid. With `y = None` the same operator is used at
/// both ends, which shares one digit family on the horizontal bonds; for
/// distinct end operators the two emission directions need separate
/// families and the horizontal alphabet doubles.
pub fn pepo_long_range(
    coeff: &dyn Fn(usize, usize) -> C64,
    x: &DenseTensor,
    y: Option<&DenseTensor>,
    grid_n: usize,
    mode: LongRangeMode,
) -> Result<Pepo> {
    if x.rank() != 2 || x.shape()[0] != x.shape()[1] {
        return Err(Error::Shape("coupling operator must be a square matrix".into()));
    }
    if let Some(y) = y {
        if y.shape() != x.shape() {
            return Err(Error::Shape("end operators must act on the same local space".into()));
        }
    }
    if grid_n < 2 {
        return Err(Error::Config("long-range grid needs at least two rows".into()));
    }
    match mode {
        LongRangeMode::Linear => long_range_linear(coeff, x, y, grid_n),
        LongRangeMode::Sqrt => long_range_sqrt(coeff, x, y, grid_n),
    }
}

fn long_range_linear(
    coeff: &dyn Fn(usize, usize) -> C64,
    x: &DenseTensor,
    y: Option<&DenseTensor>,
    n: usize,
) -> Result<Pepo> {
    let d = x.shape()[0];
    let id = eye(d);
    let symmetric = y.is_none();
    let yop = y.cloned().unwrap_or_else(|| x.clone());
    let stem = n - 1;

    // Horizontal labels: p pending, d done, plus right-moving distance
    // digits (one family per emitting end when the ends differ).
    let qx = |k: usize| format!("a{k}");
    let qy = |k: usize| if symmetric { format!("a{k}") } else { format!("b{k}") };
    // Vertical labels: z idle, u digits climb from the lower end, v digits
    // descend from the upper end; the stem column replaces z by the
    // before/after pair B, A.
    let u = |k: usize| format!("u{k}");
    let v = |k: usize| format!("v{k}");

    let mut h_labels: Vec<String> = vec!["p".into(), "d".into()];
    for k in 1..n {
        h_labels.push(qx(k));
        if !symmetric {
            h_labels.push(qy(k));
        }
    }
    let mut v_branch: Vec<String> = vec!["z".into()];
    let mut v_stem: Vec<String> = vec!["B".into(), "A".into()];
    for k in 1..n {
        v_branch.push(u(k));
        v_branch.push(v(k));
        v_stem.push(u(k));
        v_stem.push(v(k));
    }
    h_labels.sort();
    v_branch.sort();
    v_stem.sort();

    // Structural rules, uniform within branch respectively stem columns.
    let mut branch = vec![
        Rule2D::new("p", "p", "z", "z", ONE, id.clone()),
        Rule2D::new("d", "d", "z", "z", ONE, id.clone()),
        Rule2D::new("p", &qx(1), "z", "z", ONE, x.clone()),
        Rule2D::new("p", "p", &u(1), "z", ONE, yop.clone()),
        Rule2D::new("p", "p", "z", &v(1), ONE, x.clone()),
    ];
    if !symmetric {
        branch.push(Rule2D::new("p", &qy(1), "z", "z", ONE, yop.clone()));
    }
    for k in 1..n - 1 {
        branch.push(Rule2D::new(&qx(k), &qx(k + 1), "z", "z", ONE, id.clone()));
        if !symmetric {
            branch.push(Rule2D::new(&qy(k), &qy(k + 1), "z", "z", ONE, id.clone()));
        }
        branch.push(Rule2D::new("p", "p", &u(k + 1), &u(k), ONE, id.clone()));
        branch.push(Rule2D::new("p", "p", &v(k), &v(k + 1), ONE, id.clone()));
    }
    let mut stem_rules = vec![
        Rule2D::new("p", "p", "B", "B", ONE, id.clone()),
        Rule2D::new("p", "p", "A", "A", ONE, id.clone()),
        Rule2D::new("d", "p", "B", "A", ONE, id.clone()),
        Rule2D::new("p", "p", &u(1), "A", ONE, yop.clone()),
        Rule2D::new("p", "p", "B", &v(1), ONE, x.clone()),
    ];
    for k in 1..n - 1 {
        stem_rules.push(Rule2D::new("p", "p", &u(k + 1), &u(k), ONE, id.clone()));
        stem_rules.push(Rule2D::new("p", "p", &v(k), &v(k + 1), ONE, id.clone()));
    }

    let mut site_rules: Vec<Vec<Rule2D>> = (0..n * n)
        .map(|s| if s % n == stem { stem_rules.clone() } else { branch.clone() })
        .collect();

    // Per-pair consumer rules carrying the coupling coefficients.
    for i in 0..n * n {
        for j in i + 1..n * n {
            let c = coeff(i, j);
            if c.norm_sqr() == 0.0 {
                continue;
            }
            let (r1, c1) = (i / n, i % n);
            let (r2, c2) = (j / n, j % n);
            let rule = if r1 == r2 {
                // same row: digits count from the left end to the right end
                let m = c2 - c1;
                if c2 == stem {
                    Rule2D::new(&qx(m), "p", "B", "A", c, yop.clone())
                } else {
                    Rule2D::new(&qx(m), "d", "z", "z", c, yop.clone())
                }
            } else if c1 == c2 {
                // same column: digits descend from the upper end
                let vd = r2 - r1;
                if c1 == stem {
                    Rule2D::new("p", "p", &v(vd), "A", c, yop.clone())
                } else {
                    Rule2D::new("p", "d", &v(vd), "z", c, yop.clone())
                }
            } else if c1 < c2 {
                // lower end to the right: join at the corner (r1, c2)
                let m = c2 - c1;
                let vd = r2 - r1;
                if c2 == stem {
                    Rule2D::new(&qx(m), "p", "B", &u(vd), c, id.clone())
                } else {
                    Rule2D::new(&qx(m), "d", "z", &u(vd), c, id.clone())
                }
            } else {
                // lower end to the left: join at the corner (r2, c1)
                let m = c1 - c2;
                let vd = r2 - r1;
                if c1 == stem {
                    Rule2D::new(&qy(m), "p", &v(vd), "A", c, id.clone())
                } else {
                    Rule2D::new(&qy(m), "d", &v(vd), "z", c, id.clone())
                }
            };
            let site = if r1 == r2 {
                r1 * n + c2
            } else if c1 == c2 || c1 < c2 {
                if c1 == c2 { r2 * n + c1 } else { r1 * n + c2 }
            } else {
                r2 * n + c1
            };
            site_rules[site].push(rule);
        }
    }

    let mut top: Vec<String> = vec!["z".into(); n];
    let mut bottom: Vec<String> = vec!["z".into(); n];
    top[stem] = "B".into();
    bottom[stem] = "A".into();
    let mut v_by_col = BTreeMap::new();
    v_by_col.insert(stem, v_stem);
    let table = RuleTable2D {
        rows: n,
        cols: n,
        d,
        h_labels,
        v_labels: v_branch,
        v_labels_by_col: v_by_col,
        site_rules,
        boundary: Boundary2D {
            left: vec!["p".into(); n],
            right: vec!["p".into(); n],
            top,
            bottom,
        },
    };
    pepo_from_rules_2d(&table)
}
/// Digit decomposition for the square-root encoding: every distance
/// m in [1, n-1] is written m = (a-1)L + b with a, b in [1, L].
pub fn sqrt_digits(m: usize, l: usize) -> (usize, usize) {
    ((m - 1) / l + 1, (m - 1) % l + 1)
}

/// Side length of the digit alphabet for a grid of side `n`.
pub fn sqrt_chain_len(n: usize) -> usize {
    ((n - 1) as f64).sqrt().ceil() as usize
}

fn rl(k: usize) -> String {
    format!("r{k}")
}
fn ll(k: usize) -> String {
    format!("l{k}")
}
fn gl(k: usize) -> String {
    format!("g{k}")
}

/// Rule table of the square-root-extent long-range construction; exposed
/// so tests can inspect which rules a given grid exercises.
///
/// Legs of length at most L run on companion-free digit chains placed as
/// uniform structural rules. Longer legs decompose their length as
/// m = (a-1)L + b and place, along the exact path of the leg, a digit chain
/// for b plus a companion chain in the adjacent row or column that tracks a
/// and is synced step by step; the companion hands its digit to the consumer
/// through a delivery rule next to the join site. All long-leg rules are
/// pair-specific so that no free-floating marker or delivery fragments can
/// combine into spurious couplings on small grids.
pub fn long_range_sqrt_table(
    coeff: &dyn Fn(usize, usize) -> C64,
    x: &DenseTensor,
    y: Option<&DenseTensor>,
    n: usize,
) -> Result<RuleTable2D> {
    let d = x.shape()[0];
    let id = eye(d);
    let yop = y.cloned().unwrap_or_else(|| x.clone());
    let l = sqrt_chain_len(n);
    let stem = n - 1;

    // Horizontal alphabet (2L+6): p idle, d done, nc/cy vertical-leg sync,
    // hsu/hsd vertical-leg companion start markers, r right-moving digits,
    // l left-moving digits. Vertical alphabet (L+6): z idle, B/A stem flip
    // states, vs horizontal-leg companion start marker, vn/vc horizontal-leg
    // sync, g digit chain.
    let mut h_labels: Vec<String> =
        ["p", "d", "nc", "cy", "hsu", "hsd"].iter().map(|s| s.to_string()).collect();
    let mut v_labels: Vec<String> =
        ["z", "B", "A", "vs", "vn", "vc"].iter().map(|s| s.to_string()).collect();
    for k in 1..=l {
        h_labels.push(rl(k));
        h_labels.push(ll(k));
        v_labels.push(gl(k));
    }
    h_labels.sort();
    v_labels.sort();

    // Structural rules: short-form machinery only.
    let mut branch: Vec<Rule2D> = vec![
        Rule2D::new("p", "p", "z", "z", ONE, id.clone()),
        Rule2D::new("d", "d", "z", "z", ONE, id.clone()),
        Rule2D::new("p", &rl(1), "z", "z", ONE, x.clone()),
        Rule2D::new(&ll(1), "d", "z", "z", ONE, x.clone()),
        Rule2D::new("p", "p", &gl(1), "z", ONE, yop.clone()),
    ];
    for b in 1..l {
        branch.push(Rule2D::new(&rl(b), &rl(b + 1), "z", "z", ONE, id.clone()));
        branch.push(Rule2D::new(&ll(b + 1), &ll(b), "z", "z", ONE, id.clone()));
        branch.push(Rule2D::new("p", "p", &gl(b + 1), &gl(b), ONE, id.clone()));
    }
    let mut stem_rules: Vec<Rule2D> = vec![
        Rule2D::new("p", "p", "B", "B", ONE, id.clone()),
        Rule2D::new("p", "p", "A", "A", ONE, id.clone()),
        Rule2D::new("d", "p", "B", "A", ONE, id.clone()),
        Rule2D::new("p", "p", &gl(1), "A", ONE, yop.clone()),
        Rule2D::new(&ll(1), "p", "B", "A", ONE, x.clone()),
    ];
    for b in 1..l {
        stem_rules.push(Rule2D::new("p", "p", &gl(b + 1), &gl(b), ONE, id.clone()));
    }

    let mut site_rules: Vec<Vec<Rule2D>> = (0..n * n)
        .map(|s| if s % n == stem { stem_rules.clone() } else { branch.clone() })
        .collect();

    // Identical pair-specific rules placed by overlapping legs merge; a
    // genuine conflict (same inputs, different weight or operator) is left
    // in place for the compiler to reject.
    let mut put = |site: usize, rule: Rule2D| {
        let dup = site_rules[site].iter().any(|r| {
            r.left == rule.left
                && r.right == rule.right
                && r.top == rule.top
                && r.bottom == rule.bottom
                && r.weight == rule.weight
                && r.op.data() == rule.op.data()
        });
        if !dup {
            site_rules[site].push(rule);
        }
    };

    // Long horizontal leg of an operator at (row, c_from) reporting to a
    // join at (row, c_to). `rightward` legs carry r digits (operator at the
    // left end), leftward legs carry l digits (operator at the right end,
    // which also emits d). Returns the digit labels the consumer reads:
    // (digit at the join's near horizontal bond, companion digit label).
    // The companion runs in `comp_row`.
    let place_h_long = |put: &mut dyn FnMut(usize, Rule2D),
                            row: usize,
                            c_op: usize,
                            c_join: usize,
                            rightward: bool,
                            op: &DenseTensor|
     -> (String, String) {
        let above = row >= 1;
        let comp_row = if above { row - 1 } else { row + 1 };
        let m = if rightward { c_join - c_op } else { c_op - c_join };
        let (a_m, b_m) = sqrt_digits(m, l);
        let dig = |k: usize| if rightward { rl(k) } else { ll(k) };
        let cdig = |k: usize| if rightward { ll(k) } else { rl(k) };
        // operator end with companion start marker
        let (vt, vb) = if above { ("vs", "z") } else { ("z", "vs") };
        if rightward {
            put(row * n + c_op, Rule2D::new("p", &dig(1), vt, vb, ONE, op.clone()));
            put(
                comp_row * n + c_op,
                Rule2D::new("p", &cdig(1), if above { "z" } else { "vs" }, if above { "vs" } else { "z" }, ONE, id.clone()),
            );
        } else {
            let right = if c_op == stem { "p" } else { "d" };
            if c_op == stem {
                // flip at the operator; marker would clash with the stem
                // states, so leftward long legs cannot start in the stem
                put(row * n + c_op, Rule2D::new(&dig(1), right, "B", "A", ONE, op.clone()));
            } else {
                put(row * n + c_op, Rule2D::new(&dig(1), right, vt, vb, ONE, op.clone()));
            }
            put(
                comp_row * n + c_op,
                Rule2D::new(&cdig(1), "p", if above { "z" } else { "vs" }, if above { "vs" } else { "z" }, ONE, id.clone()),
            );
        }
        // interior steps with per-column sync
        let cols: Vec<usize> = if rightward {
            (c_op + 1..c_join).collect()
        } else {
            (c_join + 1..c_op).rev().collect()
        };
        for c in cols {
            let m_in = if rightward { c - c_op } else { c_op - c };
            let (a_in, b_in) = sqrt_digits(m_in, l);
            let (a_out, b_out) = sqrt_digits(m_in + 1, l);
            let sync = if a_out > a_in { "vc" } else { "vn" };
            let (st, sb) = if above { (sync, "z") } else { ("z", sync) };
            let (main, comp) = if rightward {
                (
                    Rule2D::new(&dig(b_in), &dig(b_out), st, sb, ONE, id.clone()),
                    Rule2D::new(
                        &cdig(a_in),
                        &cdig(a_out),
                        if above { "z" } else { sync },
                        if above { sync } else { "z" },
                        ONE,
                        id.clone(),
                    ),
                )
            } else {
                (
                    Rule2D::new(&dig(b_out), &dig(b_in), st, sb, ONE, id.clone()),
                    Rule2D::new(
                        &cdig(a_out),
                        &cdig(a_in),
                        if above { "z" } else { sync },
                        if above { sync } else { "z" },
                        ONE,
                        id.clone(),
                    ),
                )
            };
            put(row * n + c, main);
            put(comp_row * n + c, comp);
        }
        // delivery next to the join hands the companion digit down or up
        let at_stem = c_join == stem;
        let deliver = if rightward {
            if above {
                Rule2D::new(
                    &cdig(a_m),
                    "p",
                    if at_stem { "B" } else { "z" },
                    &gl(a_m),
                    ONE,
                    id.clone(),
                )
            } else {
                Rule2D::new(
                    &cdig(a_m),
                    "p",
                    &gl(a_m),
                    if at_stem { "A" } else { "z" },
                    ONE,
                    id.clone(),
                )
            }
        } else if above {
            Rule2D::new(
                "p",
                &cdig(a_m),
                if at_stem { "B" } else { "z" },
                &gl(a_m),
                ONE,
                id.clone(),
            )
        } else {
            Rule2D::new(
                "p",
                &cdig(a_m),
                &gl(a_m),
                if at_stem { "A" } else { "z" },
                ONE,
                id.clone(),
            )
        };
        put(comp_row * n + c_join, deliver);
        (dig(b_m), gl(a_m))
    };

    for i in 0..n * n {
        for j in i + 1..n * n {
            let w = coeff(i, j);
            if w.norm_sqr() == 0.0 {
                continue;
            }
            let (r1, c1) = (i / n, i % n);
            let (r2, c2) = (j / n, j % n);
            let not_routable = |what: &str| {
                Error::Rules(format!(
                    "pair ({r1},{c1})-({r2},{c2}) not routable in sqrt mode: {what}"
                ))
            };
            let mut put_site = |site: usize, rule: Rule2D| put(site, rule);
            if r1 == r2 {
                let m = c2 - c1;
                let at_stem = c2 == stem;
                let (left, top, bottom);
                if m <= l {
                    left = rl(m);
                    top = if at_stem { "B".to_string() } else { "z".to_string() };
                    bottom = if at_stem { "A".to_string() } else { "z".to_string() };
                } else {
                    if r1 == 0 {
                        // a companion below would hand its digit through the
                        // bottom bond, which the structural short chains can
                        // also feed, making the reading ambiguous
                        return Err(not_routable("horizontal companion"));
                    }
                    let (dig, comp) = place_h_long(&mut put_site, r1, c1, c2, true, x);
                    left = dig;
                    top = comp;
                    bottom = if at_stem { "A".into() } else { "z".to_string() };
                }
                let right = if at_stem { "p" } else { "d" };
                put(r1 * n + c2, Rule2D::new(&left, right, &top, &bottom, w, yop.clone()));
            } else if c1 == c2 {
                let m = r2 - r1;
                let at_stem = c1 == stem;
                if m <= l {
                    let (left, right, top) = if at_stem {
                        ("p".to_string(), "p".to_string(), "B".to_string())
                    } else {
                        ("p".to_string(), "d".to_string(), "z".to_string())
                    };
                    put(r1 * n + c1, Rule2D::new(&left, &right, &top, &gl(m), w, x.clone()));
                } else {
                    // a long vertical leg hands the companion digit through
                    // a side or bottom bond, both of which the structural
                    // short chains can also feed; refuse rather than build
                    // an ambiguous table
                    return Err(not_routable("vertical companion"));
                }
            } else if c1 < c2 {
                // join at (r1, c2)
                let mh = c2 - c1;
                let mv = r2 - r1;
                let at_stem = c2 == stem;
                let (left, top) = if mh <= l {
                    (rl(mh), if at_stem { "B".to_string() } else { "z".to_string() })
                } else {
                    if r1 == 0 {
                        // the companion would collide with the vertical leg
                        return Err(not_routable("horizontal companion"));
                    }
                    let (dig, comp) = place_h_long(&mut put_site, r1, c1, c2, true, x);
                    (dig, comp)
                };
                let (right, bottom) = if mv <= l {
                    (
                        if at_stem { "p".to_string() } else { "d".to_string() },
                        gl(mv),
                    )
                } else {
                    return Err(not_routable("vertical companion"));
                };
                put(r1 * n + c2, Rule2D::new(&left, &right, &top, &bottom, w, id.clone()));
            } else {
                // join at (r1, c2), above the second site and left of the
                // first; the first site reports leftward and emits d (or
                // flips the stem when it sits in the last column)
                let mh = c1 - c2;
                let mv = r2 - r1;
                let (right, top) = if mh <= l {
                    (ll(mh), "z".to_string())
                } else {
                    if r1 == 0 || c1 == stem {
                        return Err(not_routable("horizontal companion"));
                    }
                    let (dig, comp) = place_h_long(&mut put_site, r1, c1, c2, false, x);
                    (dig, comp)
                };
                let (left, bottom) = if mv <= l {
                    ("p".to_string(), gl(mv))
                } else {
                    return Err(not_routable("vertical companion"));
                };
                put(r1 * n + c2, Rule2D::new(&left, &right, &top, &bottom, w, id.clone()));
            }
        }
    }

    let mut top: Vec<String> = vec!["z".into(); n];
    let mut bottom: Vec<String> = vec!["z".into(); n];
    top[stem] = "B".into();
    bottom[stem] = "A".into();
    Ok(RuleTable2D {
        rows: n,
        cols: n,
        d,
        h_labels,
        v_labels,
        v_labels_by_col: BTreeMap::new(),
        site_rules,
        boundary: Boundary2D {
            left: vec!["p".into(); n],
            right: vec!["p".into(); n],
            top,
            bottom,
        },
    })
}

fn long_range_sqrt(
    coeff: &dyn Fn(usize, usize) -> C64,
    x: &DenseTensor,
    y: Option<&DenseTensor>,
    n: usize,
) -> Result<Pepo> {
    let table = long_range_sqrt_table(coeff, x, y, n)?;
    pepo_from_rules_2d(&table)
}
