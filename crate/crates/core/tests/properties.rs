use amenable_gibbs::dobrushin::{
    dobrushin_constant_bound, rho_bound_example, rho_numeric, row_sum_bound,
    uniqueness_certificate, Uniqueness,
};
use amenable_gibbs::group::{lattice_box, GroupContext, Norm, Site, SiteSet};
use amenable_gibbs::interval::Interval;
use amenable_gibbs::oracle::ising_chain_pressure;
use amenable_gibbs::potential::{
    delta_f_bound, eval_phi, phi_f, v_f, BoundaryCondition, CountablePotts, FiniteAlphabet, Letter,
    PairCoupling, PairParams, PairPotential, Pattern, Potential,
};
use amenable_gibbs::sampler::{run_chain, SamplerConfig};
use amenable_gibbs::specification::{
    energy_change_via, kernel_table, kernel_table_with_reference, LimitRoute,
};
use amenable_gibbs::thermo::{
    partition_function, partition_function_countable, pressure_bracket, segment_candidates,
    BracketConfig, TruncationMode,
};
use amenable_gibbs::Budget;
use proptest::prelude::*;

fn line() -> GroupContext {
    GroupContext::lattice(1, Norm::Linf).unwrap()
}

fn plane() -> GroupContext {
    GroupContext::lattice(2, Norm::Linf).unwrap()
}

fn s1(i: i64) -> Site {
    Site::new(&[i])
}

fn potts(beta: f64, lambda: f64) -> CountablePotts {
    CountablePotts::geometric(line(), beta, 1.0, lambda).unwrap()
}

/// A `q`-letter pair potential on `Z^2` with the given offsets and matrix
/// entries read cyclically from `w`.
fn pair_2d(q: u32, field: &[f64], w: &[f64]) -> PairPotential {
    let offsets = [[1, 0], [0, 1], [1, 1]];
    let mut k = 0;
    let couplings = offsets
        .iter()
        .map(|o| PairCoupling {
            offset: o.to_vec(),
            matrix: (0..q)
                .map(|_| {
                    (0..q)
                        .map(|_| {
                            k += 1;
                            w[(k - 1) % w.len()]
                        })
                        .collect()
                })
                .collect(),
        })
        .collect();
    let field = (0..q as usize).map(|a| field[a % field.len()]).collect();
    PairPotential::new(
        plane(),
        1.0,
        PairParams {
            q,
            field,
            couplings,
        },
    )
    .unwrap()
}

fn boundary_1d(background: Letter, overrides: &[(i64, Letter)]) -> BoundaryCondition {
    BoundaryCondition::new(background, overrides.iter().map(|&(i, a)| (s1(i), a)))
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(24)
}

// ---- potential ----

proptest! {
    #![proptest_config(config())]

    #[test]
    fn variation_bounds_are_non_increasing(beta in 0.01f64..2.0, lambda in 0.1f64..0.8) {
        let p = potts(beta, lambda);
        let prof = p.profile().unwrap();
        for m in 1..12 {
            prop_assert!(prof.delta(m + 1) <= prof.delta(m));
            prop_assert!(prof.tail(m + 1) <= prof.tail(m));
        }
    }

    #[test]
    fn agreement_on_a_ball_bounds_the_difference(
        beta in 0.05f64..1.5,
        lambda in 0.2f64..0.7,
        m in 1usize..5,
        bg in 0u32..4,
        inner in prop::collection::vec(0u32..4, 9),
        outer in prop::collection::vec((5i64..12, 0u32..4), 0..6),
        flip in 0u32..4,
    ) {
        let p = potts(beta, lambda);
        let r = m as i64 - 1;
        let base: Vec<(i64, Letter)> = (-4..=4).zip(inner.iter().copied()).collect();
        let x = boundary_1d(bg, &base);
        // y keeps x on E_m = ball(m - 1) and differs anywhere outside it.
        let mut changed: Vec<(i64, Letter)> = base.iter().copied().filter(|(i, _)| i.abs() <= r).collect();
        changed.extend(outer.iter().map(|&(i, a)| if i % 2 == 0 { (i, a) } else { (-i, a) }));
        changed.extend((r + 1..=4).map(|i| (i, (flip + i as u32) % 4)));
        let y = boundary_1d(flip, &changed);
        let d = eval_phi(&p, &x) - eval_phi(&p, &y);
        prop_assert!(d.abs_max() - d.width() <= p.profile().unwrap().delta(m) + 1e-12,
            "|φ(x)-φ(y)| = {:?} above δ_{} = {}", d, m, p.profile().unwrap().delta(m));
    }

    #[test]
    fn cylinder_sup_dominates_inf_and_sampled_points(
        field in prop::collection::vec(-1.0f64..1.0, 3),
        w in prop::collection::vec(-1.0f64..1.0, 27),
        letters in prop::collection::vec(0u32..3, 4),
        outside in prop::collection::vec(0u32..3, 12),
        other in prop::collection::vec(0u32..3, 12),
    ) {
        let p = pair_2d(3, &field, &w);
        let f = lattice_box(&[0, 0], &[1, 1]);
        let pat = Pattern::new(f.clone(), letters).unwrap();
        let sup = p.sup_cylinder(&pat).unwrap();
        let inf = p.inf_cylinder(&pat).unwrap();
        prop_assert!(sup.hi() >= inf.lo());
        let ring = lattice_box(&[-1, -1], &[2, 2]).difference(&f);
        let extend = |o: &[Letter]| BoundaryCondition::new(0, ring.iter().cloned().zip(o.iter().copied())).with_pattern(&pat);
        let (x, y) = (extend(&outside), extend(&other));
        let (vx, vy) = (phi_f(&p, &f, &x), phi_f(&p, &f, &y));
        for v in [vx, vy] {
            prop_assert!(v.lo() <= sup.hi() && v.hi() >= inf.lo());
        }
        let d = vx - vy;
        prop_assert!(d.abs_max() - d.width() <= delta_f_bound(&p, &f).unwrap().hi());
    }

    #[test]
    fn countable_partition_intervals_shrink_under_refinement(beta in 0.05f64..0.12, n in 1usize..3) {
        let p = potts(beta, 0.5);
        let f = line().ball(n - 1).unwrap();
        let coarse = partition_function_countable(&p, &f, &FiniteAlphabet::up_to(6), Budget::default()).unwrap();
        let fine = partition_function_countable(&p, &f, &FiniteAlphabet::up_to(12), Budget::default()).unwrap();
        prop_assert!(coarse.intersects(&fine), "{:?} vs {:?}", fine, coarse);
    }
}

#[test]
fn normalized_potts_variation_decreases_along_folner_sets() {
    let p = potts(0.1, 0.5);
    let group = line();
    let mut last = (f64::INFINITY, f64::INFINITY);
    for n in 0..5 {
        let f = group.folner_set(n).unwrap();
        let size = f.len() as f64;
        let cur = (
            v_f(&p, &f).unwrap().hi() / size,
            delta_f_bound(&p, &f).unwrap().hi() / size,
        );
        assert!(
            cur.0 <= last.0 * (1.0 + 1e-12) && cur.1 <= last.1 * (1.0 + 1e-12),
            "{n}: {cur:?} after {last:?}"
        );
        last = cur;
    }
}

// ---- thermo ----

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn nn_bracket_sandwiches_the_transfer_matrix(j in -1.0f64..1.0, h in -0.5f64..0.5, beta in 0.2f64..1.0) {
        let group = line();
        let p = PairPotential::ising_chain(group.clone(), beta, j, h).unwrap();
        let cfg = BracketConfig {
            alphabet: FiniteAlphabet::first(2),
            mode: TruncationMode::Finite,
            candidates: segment_candidates(&group, 8).unwrap(),
            ladder: Vec::new(),
            max_iter: 10_000,
            budget: Budget::default(),
        };
        let b = pressure_bracket(&p, &cfg).unwrap();
        let exact = ising_chain_pressure(beta, j, h).unwrap();
        prop_assert!(b.lower.lo() <= b.upper.hi());
        prop_assert!(b.contains(exact), "{} outside [{}, {}]", exact, b.lower.lo(), b.upper.hi());
    }

    #[test]
    fn ladder_is_monotone(beta in 0.02f64..0.12) {
        let p = potts(beta, 0.5);
        let mut cfg = BracketConfig::standard(&p, FiniteAlphabet::up_to(15), 1, Budget::default()).unwrap();
        cfg.ladder = vec![FiniteAlphabet::up_to(1), FiniteAlphabet::up_to(3), FiniteAlphabet::up_to(7)];
        let b = pressure_bracket(&p, &cfg).unwrap();
        prop_assert_eq!(b.ladder.len(), 3);
        prop_assert!(b.ladder_monotone);
    }

    #[test]
    fn partition_function_is_translation_invariant_bitwise(
        field in prop::collection::vec(-1.0f64..1.0, 2),
        w in prop::collection::vec(-1.0f64..1.0, 12),
        g in (-50i64..50, -50i64..50),
        cells in prop::collection::btree_set((0i64..3, 0i64..3), 1..6),
    ) {
        let p = pair_2d(2, &field, &w);
        let group = plane();
        let f: SiteSet = cells.iter().map(|&(a, b)| Site::new(&[a, b])).collect();
        let shifted = group.translate_right(&f, &Site::new(&[g.0, g.1]));
        let a = FiniteAlphabet::first(2);
        let z = partition_function(&p, &a, &f, Budget::default()).unwrap();
        let zg = partition_function(&p, &a, &shifted, Budget::default()).unwrap();
        prop_assert_eq!(z.lo().to_bits(), zg.lo().to_bits());
        prop_assert_eq!(z.hi().to_bits(), zg.hi().to_bits());
    }
}

// ---- specification ----

fn potts_boundary(bg: Letter, letters: &[Letter]) -> BoundaryCondition {
    let o: Vec<(i64, Letter)> = (-3..=3).zip(letters.iter().copied()).collect();
    boundary_1d(bg, &o)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn kernel_tables_are_normalized(
        beta in 0.02f64..0.12,
        bg in 0u32..6,
        letters in prop::collection::vec(0u32..6, 7),
        two_sites in any::<bool>(),
        q in 3u32..12,
    ) {
        let p = potts(beta, 0.5);
        let k: SiteSet = if two_sites { vec![s1(0), s1(1)].into() } else { SiteSet::singleton(s1(0)) };
        let t = kernel_table(&p, &k, &potts_boundary(bg, &letters), &FiniteAlphabet::up_to(q), Budget::default()).unwrap();
        prop_assert!(t.total().contains(1.0), "total {:?}", t.total());
        prop_assert!(t.entries.iter().all(|e| e.value.lo() >= 0.0));
    }

    #[test]
    fn kernel_does_not_depend_on_the_reference(
        field in prop::collection::vec(-1.0f64..1.0, 3),
        w in prop::collection::vec(-1.0f64..1.0, 27),
        reference in prop::collection::vec(0u32..3, 2),
        outside in prop::collection::vec(0u32..3, 8),
    ) {
        let p = pair_2d(3, &field, &w);
        let k: SiteSet = vec![Site::new(&[0, 0]), Site::new(&[1, 0])].into();
        let ring = lattice_box(&[-1, -1], &[2, 1]).difference(&k);
        let x = BoundaryCondition::new(0, ring.iter().cloned().zip(outside.iter().copied()));
        let a = FiniteAlphabet::first(3);
        let t0 = kernel_table(&p, &k, &x, &a, Budget::default()).unwrap();
        let t1 = kernel_table_with_reference(&p, &k, &x, &a, &reference, Budget::default()).unwrap();
        for (e0, e1) in t0.entries.iter().zip(&t1.entries) {
            prop_assert_eq!(&e0.letters, &e1.letters);
            prop_assert!(e0.value.intersects(&e1.value), "{:?} vs {:?}", e0.value, e1.value);
        }
    }

    #[test]
    fn kernel_ignores_the_boundary_inside_k(
        beta in 0.02f64..0.12,
        bg in 0u32..5,
        letters in prop::collection::vec(0u32..5, 7),
        inside in prop::collection::vec(0u32..9, 2),
    ) {
        let p = potts(beta, 0.5);
        let k: SiteSet = vec![s1(0), s1(1)].into();
        let x = potts_boundary(bg, &letters);
        let y = x.with_pattern(&Pattern::new(k.clone(), inside).unwrap());
        let a = FiniteAlphabet::up_to(5);
        let tx = kernel_table(&p, &k, &x, &a, Budget::default()).unwrap();
        let ty = kernel_table(&p, &k, &y, &a, Budget::default()).unwrap();
        prop_assert_eq!(tx.entries, ty.entries);
        prop_assert_eq!(tx.tail_mass, ty.tail_mass);
    }

    #[test]
    fn distant_boundary_changes_obey_the_quasilocal_envelope(
        beta in 0.02f64..0.12,
        bg in 0u32..4,
        far in prop::collection::vec(0u32..4, 24),
    ) {
        let p = potts(beta, 0.5);
        let k = SiteSet::singleton(s1(0));
        let x = BoundaryCondition::constant(bg);
        let a = FiniteAlphabet::up_to(4);
        let tx = kernel_table(&p, &k, &x, &a, Budget::default()).unwrap();
        let tails = p.coupling_tails();
        for r in [1i64, 3, 6] {
            // y agrees with x on ball(r) and takes the letters `far` beyond it.
            let over: Vec<(i64, Letter)> = (r + 1..=r + 12)
                .flat_map(|i| [i, -i])
                .zip(far.iter().copied())
                .collect();
            let ty = kernel_table(&p, &k, &boundary_1d(bg, &over), &a, Budget::default()).unwrap();
            // A changed site h shifts each energy change by at most
            // 2β(C(h) + C(-h)), so ε = 4β Σ_{|g|>r} C(g) bounds the total shift
            // and every kernel value moves by a factor within exp(±2ε).
            let eps = 4.0 * beta * tails.tail(r as usize + 1).hi();
            let factor = (2.0 * eps).exp();
            let mut dev = 0.0f64;
            for (ex, ey) in tx.entries.iter().zip(&ty.entries) {
                prop_assert!(ey.value.lo() <= factor * ex.value.hi() * (1.0 + 1e-12));
                prop_assert!(ex.value.lo() <= factor * ey.value.hi() * (1.0 + 1e-12));
                dev = dev.max((ex.value.mid() - ey.value.mid()).abs() - ex.value.width() - ey.value.width());
            }
            let bound = factor - 1.0;
            prop_assert!(dev <= bound + 1e-12, "r = {}: deviation {} above {}", r, dev, bound);
        }
    }

    #[test]
    fn finite_range_windows_stabilize(
        field in prop::collection::vec(-1.0f64..1.0, 2),
        w in prop::collection::vec(-1.0f64..1.0, 12),
        outside in prop::collection::vec(0u32..2, 14),
        to in prop::collection::vec(0u32..2, 2),
    ) {
        let p = pair_2d(2, &field, &w);
        let k: SiteSet = vec![Site::new(&[0, 0]), Site::new(&[0, 1])].into();
        let ring = lattice_box(&[-1, -1], &[1, 2]).difference(&k);
        let x = BoundaryCondition::new(1, ring.iter().cloned().zip(outside.iter().copied()));
        let exact = energy_change_via(&p, &k, &to, &x, LimitRoute::Influence).unwrap();
        for m in [3usize, 4, 6] {
            let v = energy_change_via(&p, &k, &to, &x, LimitRoute::Window(m)).unwrap();
            prop_assert!(v.intersects(&exact) && v.width() <= exact.width() + 1e-12, "m = {}: {:?} vs {:?}", m, v, exact);
        }
    }
}

// ---- dobrushin ----

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn rho_sample_stays_below_the_analytic_bound(
        beta in 0.05f64..0.2,
        g in -2i64..=2,
        h in -2i64..=2,
        seed in any::<u64>(),
    ) {
        prop_assume!(g != h);
        let p = potts(beta, 0.5);
        let est = rho_numeric(&p, &s1(g), &s1(h), &FiniteAlphabet::up_to(15), 4, seed).unwrap();
        let upper = est.upper.unwrap();
        prop_assert!(est.lower >= 0.0);
        prop_assert!(est.lower <= upper.hi(), "{} above {:?}", est.lower, upper);
    }

    #[test]
    fn analytic_rho_is_symmetric(lambda in 0.1f64..0.8, g in -6i64..=6, h in -6i64..=6) {
        let p = potts(1.0, lambda);
        let a = rho_bound_example(&p, &s1(g), &s1(h)).unwrap();
        let b = rho_bound_example(&p, &s1(h), &s1(g)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn certificate_is_monotone_in_beta(b1 in 0.001f64..0.3, b2 in 0.001f64..0.3) {
        let (lo, hi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
        let p = potts(1.0, 0.5);
        let c_lo = uniqueness_certificate(&p, lo).unwrap();
        let c_hi = uniqueness_certificate(&p, hi).unwrap();
        prop_assert!(c_lo.c_bound.hi() <= c_hi.c_bound.hi());
        if c_hi.verdict == Uniqueness::Unique {
            prop_assert_eq!(c_lo.verdict, Uniqueness::Unique);
        }
    }

    #[test]
    fn row_sums_bracket_the_constant(beta in 0.01f64..0.3, lambda in 0.1f64..0.8, g in -20i64..20, r in 1usize..8) {
        let p = potts(1.0, lambda);
        let c = dobrushin_constant_bound(&p, beta).unwrap();
        let row = row_sum_bound(&p, beta, &s1(g), r).unwrap();
        prop_assert!(row.intersects(&c), "{:?} vs {:?}", row, c);
        let explicit: Interval = line()
            .ball(r)
            .unwrap()
            .iter()
            .map(|h| rho_bound_example(&p, &s1(g), &line().mul(&s1(g), h)).unwrap().scale(beta))
            .sum();
        prop_assert!(explicit.lo() <= row.hi());
    }
}

// ---- sampler ----

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn chains_are_reproducible_and_finite_alphabets_never_extend(
        field in prop::collection::vec(-1.0f64..1.0, 3),
        w in prop::collection::vec(-1.0f64..1.0, 27),
        bg in 0u32..3,
        seed in any::<u64>(),
        sweeps in 0u64..20,
    ) {
        let p = pair_2d(3, &field, &w);
        let window = lattice_box(&[0, 0], &[2, 2]);
        let cfg = SamplerConfig::new(FiniteAlphabet::first(3));
        let x = BoundaryCondition::constant(bg);
        let a = run_chain(&p, &window, &x, sweeps, seed, &cfg, true).unwrap();
        let b = run_chain(&p, &window, &x, sweeps, seed, &cfg, true).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.extensions, 0);
        prop_assert_eq!(a.samples.as_ref().map(|s| s.len()), Some(sweeps as usize));
    }

    #[test]
    fn countable_chains_are_reproducible(beta in 0.06f64..0.12, seed in any::<u64>()) {
        let p = potts(beta, 0.5);
        let window: SiteSet = (0..4).map(s1).collect();
        let cfg = SamplerConfig::new(FiniteAlphabet::up_to(255));
        let x = BoundaryCondition::constant(0);
        let a = run_chain(&p, &window, &x, 10, seed, &cfg, false).unwrap();
        let b = run_chain(&p, &window, &x, 10, seed, &cfg, false).unwrap();
        prop_assert_eq!(a, b);
    }
}
