use super::builders::{pepo_long_range, pepo_nearest_neighbor, LongRangeMode};
use super::*;
use crate::mpo::test_ops::pauli;
use crate::tensor::{inner, kron};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Dense embedding of on-site operators into the full grid space
/// (row-major raster ordering, site 0 outermost).
fn dense_embed(n_sites: usize, d: usize, ops: &[(usize, &DenseTensor)]) -> DenseTensor {
    let mut acc = DenseTensor::eye(1);
    for s in 0..n_sites {
        let local = ops
            .iter()
            .filter(|(site, _)| *site == s)
            .fold(DenseTensor::eye(d), |m, (_, op)| contract(op, &m, &[1], &[0]));
        acc = kron(&acc, &local);
    }
    acc
}

fn dense_nn_sum(x: &DenseTensor, grid_n: usize) -> DenseTensor {
    let n = grid_n * grid_n;
    let d = x.shape()[0];
    let dim = d.pow(n as u32);
    let mut acc = DenseTensor::zeros(&[dim, dim]);
    for r in 0..grid_n {
        for cc in 0..grid_n {
            let i = r * grid_n + cc;
            if cc + 1 < grid_n {
                acc = acc.add(&dense_embed(n, d, &[(i, x), (i + 1, x)]));
            }
            if r + 1 < grid_n {
                acc = acc.add(&dense_embed(n, d, &[(i, x), (i + grid_n, x)]));
            }
        }
    }
    acc
}

fn dense_pair_sum(
    coeff: &dyn Fn(usize, usize) -> C64,
    x: &DenseTensor,
    y: &DenseTensor,
    grid_n: usize,
) -> DenseTensor {
    let n = grid_n * grid_n;
    let d = x.shape()[0];
    let dim = d.pow(n as u32);
    let mut acc = DenseTensor::zeros(&[dim, dim]);
    for i in 0..n {
        for j in i + 1..n {
            let w = coeff(i, j);
            if w.norm_sqr() == 0.0 {
                continue;
            }
            acc = acc.add(&dense_embed(n, d, &[(i, x), (j, y)]).scale(w));
        }
    }
    acc
}

fn rel_err(got: &DenseTensor, want: &DenseTensor) -> f64 {
    got.add(&want.scale(-ONE)).norm() / want.norm().max(1e-300)
}

#[test]
fn identity_pepo_is_dense_identity() {
    let m = Pepo::identity(2, 2, 2);
    assert!(m.sites.iter().all(|t| t.shape()[..4] == [1, 1, 1, 1]));
    let dense = m.to_dense().unwrap();
    assert!(rel_err(&dense, &DenseTensor::eye(16)) < 1e-15);
}

#[test]
fn product_pepo_matches_dense_embedding() {
    let m = Pepo::product(2, 2, 2, &[(1, pauli('X')), (2, pauli('Z'))]);
    let want = dense_embed(4, 2, &[(1, &pauli('X')), (2, &pauli('Z'))]);
    assert!(rel_err(&m.to_dense().unwrap(), &want) < 1e-15);
}

#[test]
fn dense_guard_rejects_large_grids() {
    let m = Pepo::identity(4, 4, 2);
    assert!(matches!(m.to_dense(), Err(Error::SizeGuard(_))));
}

#[test]
fn random_peps_dense_matches_site_contraction() {
    // sanity: a 2x2 product state embeds in raster order
    let up = vec![c(1.0), c(0.0)];
    let down = vec![c(0.0), c(1.0)];
    let psi = Peps::product(2, 2, &[up.clone(), down.clone(), down.clone(), up]);
    let dense = psi.to_dense().unwrap();
    // |0110> in raster order -> index 0b0110
    for (i, v) in dense.data().iter().enumerate() {
        if i == 0b0110 {
            assert!((v - ONE).norm() < 1e-15);
        } else {
            assert!(v.norm() < 1e-15);
        }
    }
}

#[test]
fn nearest_neighbor_matches_dense_on_2x2() {
    let m = pepo_nearest_neighbor(&pauli('X'), 2).unwrap();
    let want = dense_nn_sum(&pauli('X'), 2);
    assert!(rel_err(&m.to_dense().unwrap(), &want) < 1e-12);
}

#[test]
fn nearest_neighbor_matches_dense_on_3x3() {
    let m = pepo_nearest_neighbor(&pauli('Z'), 3).unwrap();
    let want = dense_nn_sum(&pauli('Z'), 3);
    assert!(rel_err(&m.to_dense().unwrap(), &want) < 1e-12);
}

#[test]
fn nearest_neighbor_bond_extents() {
    let m = pepo_nearest_neighbor(&pauli('X'), 3).unwrap();
    assert_eq!(m.max_horizontal_bond(), 3);
    for cc in 0..2 {
        assert_eq!(m.max_vertical_bond_in_col(cc), 2);
    }
    assert_eq!(m.max_vertical_bond_in_col(2), 3);
}

#[test]
fn long_range_linear_symmetric_matches_dense_on_3x3() {
    let coeff = |i: usize, j: usize| c(1.0 / (1.0 + (i + 2 * j) as f64));
    let m = pepo_long_range(&coeff, &pauli('X'), None, 3, LongRangeMode::Linear).unwrap();
    let want = dense_pair_sum(&coeff, &pauli('X'), &pauli('X'), 3);
    assert!(rel_err(&m.to_dense().unwrap(), &want) < 1e-11);
}

#[test]
fn long_range_linear_symmetric_matches_dense_on_2x2() {
    let coeff = |i: usize, j: usize| c(0.3 + (i * 4 + j) as f64);
    let m = pepo_long_range(&coeff, &pauli('Z'), None, 2, LongRangeMode::Linear).unwrap();
    let want = dense_pair_sum(&coeff, &pauli('Z'), &pauli('Z'), 2);
    assert!(rel_err(&m.to_dense().unwrap(), &want) < 1e-12);
}

#[test]
fn long_range_linear_distinct_ends_matches_dense() {
    let coeff = |i: usize, j: usize| C64::new(0.5 + i as f64, 0.1 * j as f64);
    let m = pepo_long_range(&coeff, &pauli('X'), Some(&pauli('Y')), 3, LongRangeMode::Linear)
        .unwrap();
    let want = dense_pair_sum(&coeff, &pauli('X'), &pauli('Y'), 3);
    assert!(rel_err(&m.to_dense().unwrap(), &want) < 1e-11);
}

#[test]
fn long_range_linear_horizontal_extent_is_side_plus_one() {
    let coeff = |_: usize, _: usize| ONE;
    let m = pepo_long_range(&coeff, &pauli('X'), None, 3, LongRangeMode::Linear).unwrap();
    assert_eq!(m.max_horizontal_bond(), 4);
}

#[test]
fn boundary_contraction_of_identity_gives_norm2() {
    let psi = Peps::random(3, 3, 2, 2, 41);
    let id = Pepo::identity(3, 3, 2);
    let rep = boundary_contract_expectation(&psi, &id, 64).unwrap();
    let dense = psi.to_dense().unwrap();
    let want = inner(&dense, &dense);
    assert!((rep.value - want).norm() < 1e-9 * want.norm());
}

#[test]
fn boundary_contraction_counts_edges_on_product_state() {
    // <0...0| sum_edges Z_i Z_j |0...0> = number of edges
    for grid_n in [2usize, 3, 4] {
        let up = vec![c(1.0), c(0.0)];
        let psi = Peps::product(grid_n, grid_n, &vec![up; grid_n * grid_n]);
        let m = pepo_nearest_neighbor(&pauli('Z'), grid_n).unwrap();
        let rep = boundary_contract_expectation(&psi, &m, 16).unwrap();
        let edges = (2 * grid_n * (grid_n - 1)) as f64;
        assert!((rep.value.re - edges).abs() < 1e-10, "{} vs {}", rep.value.re, edges);
        assert!(rep.value.im.abs() < 1e-10);
    }
}

#[test]
fn boundary_contraction_converges_to_dense() {
    let psi = Peps::random(3, 3, 2, 2, 7);
    let m = pepo_nearest_neighbor(&pauli('X'), 3).unwrap();
    let dense_m = m.to_dense().unwrap();
    let dense_psi = psi.to_dense().unwrap();
    let mpsi = contract(&dense_m, &dense_psi, &[1], &[0]);
    let want = inner(&dense_psi, &mpsi);
    let norm2 = inner(&dense_psi, &dense_psi).re;
    let mut errs = Vec::new();
    for d_cut in [2usize, 4, 8, 16, 32] {
        let rep = boundary_contract_expectation(&psi, &m, d_cut).unwrap();
        errs.push((rep.value - want).norm() / norm2);
    }
    assert!(errs.last().unwrap() < &1e-9, "errors {errs:?}");
    // truncation error shrinks as the cut grows (weak monotonicity)
    assert!(errs.first().unwrap() + 1e-12 >= *errs.last().unwrap());
}

#[test]
fn termwise_route_matches_pepo_route() {
    let grid_n = 3;
    let psi = Peps::random(grid_n, grid_n, 2, 2, 9);
    let m = pepo_nearest_neighbor(&pauli('Z'), grid_n).unwrap();
    let rep = boundary_contract_expectation(&psi, &m, 32).unwrap();
    let mut terms = Vec::new();
    for r in 0..grid_n {
        for cc in 0..grid_n {
            let i = r * grid_n + cc;
            if cc + 1 < grid_n {
                terms.push(PepsTerm {
                    coeff: ONE,
                    ops: vec![(i, pauli('Z')), (i + 1, pauli('Z'))],
                });
            }
            if r + 1 < grid_n {
                terms.push(PepsTerm {
                    coeff: ONE,
                    ops: vec![(i, pauli('Z')), (i + grid_n, pauli('Z'))],
                });
            }
        }
    }
    let (val, cost) = peps_expectation_termwise(&psi, &terms, 32).unwrap();
    assert_eq!(cost.terms, terms.len());
    assert!(cost.columns_applied >= terms.len());
    assert!((val - rep.value).norm() < 2e-9 * rep.value.norm().max(1.0));
}

#[test]
fn built_pepos_are_hermitian_for_hermitian_couplings() {
    let symm = |i: usize, j: usize| c(0.7 + (i * j % 5) as f64 * 0.13);
    for m in [
        pepo_nearest_neighbor(&pauli('X'), 3).unwrap(),
        pepo_long_range(&symm, &pauli('Y'), None, 3, LongRangeMode::Linear).unwrap(),
    ] {
        let dense = m.to_dense().unwrap();
        let dag = dense.dagger();
        let nrm = dense.data().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let diff: f64 = dense
            .data()
            .iter()
            .zip(dag.data().iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(diff < 1e-12 * nrm);
    }
}

#[test]
fn boundary_contraction_is_exact_on_product_states_at_linear_cut() {
    // With a product state both layers of the sandwich are extent 1, so a
    // cut growing linearly with the grid side reproduces the exact value.
    let cases = [(3usize, 3usize), (4, 3)];
    for (rows, cols) in cases {
        let mut vecs = Vec::new();
        for k in 0..rows * cols {
            let th = 0.3 + 0.17 * k as f64;
            vecs.push(vec![c(th.cos()), C64::new(0.2 * th.sin(), 0.4 * th.sin())]);
        }
        let vecs: Vec<Vec<C64>> = vecs
            .into_iter()
            .map(|v| {
                let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                v.into_iter().map(|z| z / nrm).collect()
            })
            .collect();
        let psi = Peps::product(rows, cols, &vecs);
        let table = builders::nearest_neighbor_table(&pauli('X'), rows, cols).unwrap();
        let m = pepo_from_rules_2d(&table).unwrap();
        // exact value from the term-wise route with an unconstrained cut
        let mut terms = Vec::new();
        for r in 0..rows {
            for cc in 0..cols {
                let i = r * cols + cc;
                if cc + 1 < cols {
                    terms.push(PepsTerm { coeff: ONE, ops: vec![(i, pauli('X')), (i + 1, pauli('X'))] });
                }
                if r + 1 < rows {
                    terms.push(PepsTerm { coeff: ONE, ops: vec![(i, pauli('X')), (i + cols, pauli('X'))] });
                }
            }
        }
        let (want, _) = peps_expectation_termwise(&psi, &terms, 256).unwrap();
        let d_cut = 3 * rows.max(cols);
        let rep = boundary_contract_expectation(&psi, &m, d_cut).unwrap();
        assert!(
            (rep.value - want).norm() < 1e-10,
            "{rows}x{cols}: {} vs {want}",
            rep.value
        );
    }
}

#[test]
fn cross_method_consistency_beyond_dense_grids() {
    // 4x4 has no dense oracle; the PEPO route and the term-wise route must
    // agree within ten times the larger reported truncation error.
    let grid_n = 4;
    let psi = Peps::random(grid_n, grid_n, 2, 2, 23);
    let m = pepo_nearest_neighbor(&pauli('Z'), grid_n).unwrap();
    let rep = boundary_contract_expectation(&psi, &m, 24).unwrap();
    let mut terms = Vec::new();
    for r in 0..grid_n {
        for cc in 0..grid_n {
            let i = r * grid_n + cc;
            if cc + 1 < grid_n {
                terms.push(PepsTerm { coeff: ONE, ops: vec![(i, pauli('Z')), (i + 1, pauli('Z'))] });
            }
            if r + 1 < grid_n {
                terms.push(PepsTerm { coeff: ONE, ops: vec![(i, pauli('Z')), (i + grid_n, pauli('Z'))] });
            }
        }
    }
    let (val, _) = peps_expectation_termwise(&psi, &terms, 24).unwrap();
    let trunc = rep.column_errors.iter().cloned().fold(0.0f64, f64::max);
    let scale = rep.value.norm().max(1.0);
    let tol = (10.0 * trunc).max(1e-10) * scale;
    assert!((val - rep.value).norm() < tol, "{val} vs {} tol {tol}", rep.value);
}

#[test]
fn termwise_single_term_on_product_state_is_local_product() {
    let up = vec![c(1.0), c(0.0)];
    let plus = vec![c(1.0 / 2f64.sqrt()), c(1.0 / 2f64.sqrt())];
    let mut vecs = vec![up; 9];
    vecs[2] = plus.clone();
    vecs[7] = plus;
    let psi = Peps::product(3, 3, &vecs);
    let term = PepsTerm { coeff: c(2.0), ops: vec![(2, pauli('X')), (7, pauli('X'))] };
    let (val, _) = peps_expectation_termwise(&psi, &[term], 16).unwrap();
    // <+|X|+> = 1 at both sites
    assert!((val - c(2.0)).norm() < 1e-12);
}

#[test]
fn termwise_zero_terms_is_zero() {
    let psi = Peps::random(2, 2, 2, 2, 3);
    let (val, cost) = peps_expectation_termwise(&psi, &[], 8).unwrap();
    assert_eq!(val, C64::new(0.0, 0.0));
    assert_eq!(cost.terms, 0);
}

#[test]
fn compiler_rejects_duplicate_rules() {
    let rules = vec![
        Rule2D::new("p", "p", "z", "z", ONE, pauli('I')),
        Rule2D::new("p", "p", "z", "z", ONE, pauli('X')),
    ];
    let b = Boundary2D::uniform(2, 2, "p", "p", "z", "z");
    let table = RuleTable2D::uniform(rules, 2, 2, b);
    assert!(matches!(pepo_from_rules_2d(&table), Err(Error::Rules(_))));
}

#[test]
fn compiler_rejects_unknown_labels_in_boundary_sized_tables() {
    let rules = vec![Rule2D::new("p", "q", "z", "z", ONE, pauli('I'))];
    let b = Boundary2D::uniform(2, 2, "p", "p", "z", "z");
    let mut table = RuleTable2D::uniform(rules, 2, 2, b);
    table.h_labels = vec!["p".into()];
    assert!(matches!(pepo_from_rules_2d(&table), Err(Error::Rules(_))));
}

#[test]
fn long_range_sqrt_matches_dense_on_2x2() {
    let coeff = |i: usize, j: usize| C64::new(1.0 + 0.3 * i as f64, 0.2 * j as f64);
    let m = pepo_long_range(&coeff, &pauli('X'), Some(&pauli('Y')), 2, LongRangeMode::Sqrt)
        .unwrap();
    let want = dense_pair_sum(&coeff, &pauli('X'), &pauli('Y'), 2);
    assert!(rel_err(&m.to_dense().unwrap(), &want) < 1e-11);
}

#[test]
fn long_range_sqrt_matches_dense_on_3x3() {
    let coeff = |i: usize, j: usize| C64::new(0.4 + 0.7 * i as f64, 0.11 * j as f64 - 0.3);
    let m = pepo_long_range(&coeff, &pauli('X'), Some(&pauli('Y')), 3, LongRangeMode::Sqrt)
        .unwrap();
    let want = dense_pair_sum(&coeff, &pauli('X'), &pauli('Y'), 3);
    assert!(rel_err(&m.to_dense().unwrap(), &want) < 1e-11);
}

#[test]
fn long_range_sqrt_symmetric_is_hermitian() {
    let coeff = |i: usize, j: usize| c(0.5 + (i * j) as f64 * 0.1);
    let m = pepo_long_range(&coeff, &pauli('Y'), None, 3, LongRangeMode::Sqrt)
        .unwrap()
        .to_dense()
        .unwrap();
    let diff: f64 = m
        .data()
        .iter()
        .zip(m.dagger().data().iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let norm: f64 = m.data().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    assert!(diff < 1e-12 * norm);
}

#[test]
fn long_range_sqrt_bond_extents() {
    let coeff = |_: usize, _: usize| ONE;
    // side 3: L = ceil(sqrt(2)) = 2 -> horizontal 2L+6 = 10, vertical L+6 = 8
    let m = pepo_long_range(&coeff, &pauli('Z'), None, 3, LongRangeMode::Sqrt).unwrap();
    assert_eq!(m.max_horizontal_bond(), 10);
    assert_eq!(m.max_vertical_bond(), 8);
    // side 2: L = 1 -> 8 and 7
    let m = pepo_long_range(&coeff, &pauli('Z'), None, 2, LongRangeMode::Sqrt).unwrap();
    assert_eq!(m.max_horizontal_bond(), 8);
    assert_eq!(m.max_vertical_bond(), 7);
}

#[test]
fn long_range_sqrt_flags_rules_unexercised_by_small_grids() {
    // The dense check only sees rules that participate in at least one
    // complete assembly of the grid. Enumerate the assemblies, flag every
    // rule that appears in none of them, and verify that dropping the
    // flagged rules leaves the dense operator unchanged.
    let coeff = |i: usize, j: usize| c(1.0 + (i + 2 * j) as f64 * 0.21);
    let table = builders::long_range_sqrt_table(&coeff, &pauli('X'), None, 3).unwrap();
    let full = pepo_from_rules_2d(&table).unwrap().to_dense().unwrap();
    let mut exercised = vec![std::collections::BTreeSet::new(); table.site_rules.len()];
    for asm in enumerate_assemblies(&table) {
        for (site, ri) in asm {
            exercised[site].insert(ri);
        }
    }
    let mut pruned = table.clone();
    let mut flagged = 0usize;
    for (site, rules) in pruned.site_rules.iter_mut().enumerate() {
        let keep = &exercised[site];
        flagged += rules.len() - keep.len();
        let mut ri = 0usize;
        rules.retain(|_| {
            ri += 1;
            keep.contains(&(ri - 1))
        });
    }
    // Structural chain rules near the edges never complete an assembly on
    // a side-3 grid; they are exactly the rules the dense check is blind
    // to, and dropping them must not change the operator.
    assert!(flagged > 0);
    let kept = pepo_from_rules_2d(&pruned).unwrap().to_dense().unwrap();
    assert!(rel_err(&kept, &full) < 1e-13);
    // On a 4x4 grid a routable long leg places companion/sync rules that
    // lie beyond any dense cross-check on side-3 grids.
    let one_pair = |a: usize, b: usize| if (a, b) == (4, 7) { ONE } else { C64::new(0.0, 0.0) };
    let t4 = builders::long_range_sqrt_table(&one_pair, &pauli('X'), None, 4).unwrap();
    let marked = t4
        .site_rules
        .iter()
        .flatten()
        .filter(|r| {
            ["vs", "vn", "vc"].contains(&r.top.as_str())
                || ["vs", "vn", "vc"].contains(&r.bottom.as_str())
        })
        .count();
    assert!(marked > 0);
}

/// Exact expectation of a single weighted coupling on a random product
/// state, contracted without truncation; exercises one routing variant of
/// the square-root encoding per call.
fn check_sqrt_single_pair(n: usize, i: usize, j: usize) {
    let w = C64::new(0.8, 0.3);
    let coeff = move |a: usize, b: usize| if (a, b) == (i, j) { w } else { C64::new(0.0, 0.0) };
    let m = pepo_long_range(&coeff, &pauli('X'), Some(&pauli('Y')), n, LongRangeMode::Sqrt)
        .unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64((17 * n + i + 31 * j) as u64);
    for _ in 0..3 {
        let vecs: Vec<Vec<C64>> = (0..n * n)
            .map(|_| {
                let v: Vec<C64> = (0..2)
                    .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                v.into_iter().map(|z| z / nrm).collect()
            })
            .collect();
        let psi = Peps::product(n, n, &vecs);
        let got = boundary_contract_expectation(&psi, &m, 64).unwrap().value;
        let ev = |site: usize, op: &DenseTensor| {
            let v = &vecs[site];
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..2 {
                for b in 0..2 {
                    acc += v[a].conj() * op.data()[a * 2 + b] * v[b];
                }
            }
            acc
        };
        let want = w * ev(i, &pauli('X')) * ev(j, &pauli('Y'));
        assert!((got - want).norm() < 1e-9, "pair ({i},{j}) on {n}x{n}: {got} vs {want}");
    }
}

/// Couplings whose long leg the square-root router cannot realise without
/// ambiguity must be refused at build time, never silently misbuilt.
fn assert_sqrt_pair_refused(n: usize, i: usize, j: usize) {
    let coeff = move |a: usize, b: usize| if (a, b) == (i, j) { ONE } else { C64::new(0.0, 0.0) };
    match pepo_long_range(&coeff, &pauli('X'), Some(&pauli('Y')), n, LongRangeMode::Sqrt) {
        Err(Error::Rules(msg)) => assert!(msg.contains("not routable"), "{msg}"),
        other => panic!("pair ({i},{j}) on {n}x{n} should be refused, got {other:?}"),
    }
}

#[test]
fn long_range_sqrt_long_legs_route_on_larger_grids() {
    // 4x4, L = 2: horizontal legs of length 3 need the companion machinery,
    // which runs in the row above the operator end.
    check_sqrt_single_pair(4, 4, 7); // same row, interior, long horizontal
    check_sqrt_single_pair(4, 4, 11); // below-right, long horizontal
}

#[test]
fn long_range_sqrt_digit_carries_route_on_5x5() {
    // length-4 legs wrap the digit b and emit a carry to the companion
    check_sqrt_single_pair(5, 5, 9); // horizontal with carry
    check_sqrt_single_pair(5, 5, 19); // below-right, long horizontal leg
    check_sqrt_single_pair(5, 8, 10); // below-left, long horizontal leg
}

#[test]
fn long_range_sqrt_refuses_unroutable_long_legs() {
    // Long horizontal legs in the top row have no room for the companion,
    // and long vertical legs would hand the companion digit through bonds
    // the short-leg chains can also feed.
    assert_sqrt_pair_refused(4, 0, 3); // same row at the top edge
    assert_sqrt_pair_refused(4, 1, 13); // same column, long vertical
    assert_sqrt_pair_refused(4, 3, 15); // stem column, long vertical
    assert_sqrt_pair_refused(4, 0, 14); // below-right, long vertical
    assert_sqrt_pair_refused(4, 2, 13); // below-left, long vertical
    assert_sqrt_pair_refused(5, 0, 4); // top-row horizontal with carry
    assert_sqrt_pair_refused(5, 0, 20); // vertical with carry
    assert_sqrt_pair_refused(5, 8, 21); // below-left, both legs long
}

/// All ways to pick one rule per site so that every shared bond label and
/// every boundary label matches; the dense operator is exactly the sum of
/// these assemblies.
fn enumerate_assemblies(t: &RuleTable2D) -> Vec<Vec<(usize, usize)>> {
    let (rows, cols) = (t.rows, t.cols);
    let mut found = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();
    fn rec(
        t: &RuleTable2D,
        rows: usize,
        cols: usize,
        chosen: &mut Vec<usize>,
        found: &mut Vec<Vec<(usize, usize)>>,
    ) {
        let s = chosen.len();
        if s == rows * cols {
            found.push(chosen.iter().copied().enumerate().collect());
            return;
        }
        let (r, c) = (s / cols, s % cols);
        for (ri, rule) in t.site_rules[s].iter().enumerate() {
            let left_ok = if c == 0 {
                rule.left == t.boundary.left[r]
            } else {
                rule.left == t.site_rules[s - 1][chosen[s - 1]].right
            };
            let top_ok = if r == 0 {
                rule.top == t.boundary.top[c]
            } else {
                rule.top == t.site_rules[s - cols][chosen[s - cols]].bottom
            };
            let right_ok = c != cols - 1 || rule.right == t.boundary.right[r];
            let bottom_ok = r != rows - 1 || rule.bottom == t.boundary.bottom[c];
            if left_ok && top_ok && right_ok && bottom_ok {
                chosen.push(ri);
                rec(t, rows, cols, chosen, found);
                chosen.pop();
            }
        }
    }
    rec(t, rows, cols, &mut chosen, &mut found);
    found
}

