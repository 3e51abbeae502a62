//! Property and invariant suite: the structural claims that should hold on
//! every construction, checked exhaustively at desk scale or by proptest.

use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;

use symqt::group::{
    is_exact, is_transitive, orbits, subgroup_generated, FiniteGroup, GroupAction, Subgroup,
};
use symqt::linalg::{c, cr, rank, spans, CMat, CVec};
use symqt::measurement::{measure, rng_from_seed, transition_probability, State};
use symqt::operators::{
    build_operator, conditional_expectation_projection, solve_parameter_operator,
};
use symqt::parametric::{
    compare, conjugate_stabilizers_hold, is_permissible, refines, ParamOrder, ParametricFunction,
};
use symqt::repr::{
    decompose, fourier_transform, inverse_fourier, Representation, DEFAULT_DECOMPOSE_SEED,
};
use symqt::spectrum::{a_spectrum, parametric_basis};
use symqt::triangle::{triangle_action, triangle_encodings, triangle_parameters, TriangleModel};

fn s4() -> Arc<FiniteGroup> {
    Arc::new(FiniteGroup::symmetric(4).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_subgroups_satisfy_group_axioms(gens in proptest::collection::vec(0usize..24, 0..4)) {
        let group = s4();
        let sg = subgroup_generated(&group, &gens).unwrap();
        // Subgroup::new would reject an unclosed set; re-verify directly
        prop_assert!(sg.contains(group.identity()));
        for &a in sg.members() {
            prop_assert!(sg.contains(group.inv(a)));
            for &b in sg.members() {
                prop_assert!(sg.contains(group.mul(a, b)));
            }
        }
        // Lagrange: the order divides |G|
        prop_assert_eq!(24 % sg.len(), 0);
    }

    #[test]
    fn orbits_partition_the_point_set(gens in proptest::collection::vec(0usize..24, 0..3)) {
        let group = s4();
        let act = GroupAction::regular(group.clone());
        let sg = subgroup_generated(&group, &gens).unwrap();
        let blocks = orbits(&act, &sg);
        let mut seen = [false; 24];
        for block in &blocks {
            for &p in block {
                prop_assert!(!seen[p], "blocks overlap");
                seen[p] = true;
            }
            // every block is a single subgroup orbit
            prop_assert_eq!(block.len(), sg.len());
        }
        prop_assert!(seen.iter().all(|&s| s), "blocks do not cover");
    }

    #[test]
    fn fourier_round_trip_on_s3(values in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 6)) {
        let group = Arc::new(FiniteGroup::symmetric(3).unwrap());
        let act = GroupAction::regular(group);
        let rep = Representation::regular(&act);
        let blocks = decompose(&rep, DEFAULT_DECOMPOSE_SEED).unwrap();
        let mut irreps = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for b in &blocks {
            if seen.insert(b.multiplicity_tag) {
                irreps.push(rep.restrict(&b.basis).unwrap());
            }
        }
        let f: Vec<num_complex::Complex64> = values.iter().map(|&(re, im)| c(re, im)).collect();
        let fhat: Vec<CMat> = irreps
            .iter()
            .map(|irr| fourier_transform(&f, irr).unwrap())
            .collect();
        let refs: Vec<&Representation> = irreps.iter().collect();
        let back = inverse_fourier(&refs, &fhat).unwrap();
        for g in 0..6 {
            prop_assert!((back[g] - f[g]).norm() < 1e-10);
        }
    }

    #[test]
    fn born_transition_matrices_are_doubly_stochastic(seed in 0u64..500) {
        // two random orthonormal bases of C², linked by Born probabilities
        let mut rng = rng_from_seed(seed);
        let mut draw = || c(rand::Rng::random::<f64>(&mut rng) - 0.5, rand::Rng::random::<f64>(&mut rng) - 0.5);
        let a0 = CVec::from_fn(2, |_, _| draw());
        let a0 = a0.clone().unscale(a0.norm());
        let a1 = CVec::from_row_slice(&[-a0[1].conj(), a0[0].conj()]);
        let b0 = CVec::from_fn(2, |_, _| draw());
        let b0 = b0.clone().unscale(b0.norm());
        let b1 = CVec::from_row_slice(&[-b0[1].conj(), b0[0].conj()]);
        let tag = symqt::operators::BasisTag("M".into());
        let t = [
            [
                transition_probability(&a0, &b0, &tag, &tag).unwrap(),
                transition_probability(&a0, &b1, &tag, &tag).unwrap(),
            ],
            [
                transition_probability(&a1, &b0, &tag, &tag).unwrap(),
                transition_probability(&a1, &b1, &tag, &tag).unwrap(),
            ],
        ];
        for i in 0..2 {
            prop_assert!((t[i][0] + t[i][1] - 1.0).abs() < 1e-9);
            prop_assert!((t[0][i] + t[1][i] - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn exactness_and_transitivity_on_the_natural_action() {
    let act = GroupAction::natural_symmetric(3).unwrap();
    let full = Subgroup::full(act.group().clone());
    assert!(is_transitive(&act, &full));
    assert!(!is_exact(&act, &full));
    let trivial = Subgroup::trivial(act.group().clone());
    assert!(!is_transitive(&act, &trivial));
    assert!(is_exact(&act, &trivial));
}

#[test]
fn conjugate_stabilizers_on_the_triangle() {
    // the stabilizer of a level set transports by conjugation when the
    // parameter is permissible
    let act = triangle_action();
    let full = Subgroup::full(act.group().clone());
    let theta0 = &triangle_parameters()["theta0"];
    assert!(is_permissible(theta0, &act, &full).permissible);
    assert!(conjugate_stabilizers_hold(theta0, &act).unwrap());
    let ident = ParametricFunction::identity("id", act.point_names());
    assert!(conjugate_stabilizers_hold(&ident, &act).unwrap());
}

#[test]
fn matrix_element_orthogonality() {
    // d_r (1/|G|) Σ_g U_r(g⁻¹)_{il} U_r(g)_{lj}-type products collapse to
    // Kronecker deltas in the trace pairing
    for group in [
        FiniteGroup::cyclic(3).unwrap(),
        FiniteGroup::symmetric(3).unwrap(),
        FiniteGroup::dihedral(4).unwrap(),
    ] {
        let group = Arc::new(group);
        let n = group.order();
        let act = GroupAction::regular(group.clone());
        let rep = Representation::regular(&act);
        let blocks = decompose(&rep, DEFAULT_DECOMPOSE_SEED).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for b in &blocks {
            if !seen.insert(b.multiplicity_tag) {
                continue;
            }
            let irr = rep.restrict(&b.basis).unwrap();
            let d = irr.dim();
            for i in 0..d {
                for l in 0..d {
                    for j in 0..d {
                        for m in 0..d {
                            let mut sum = cr(0.0);
                            for g in 0..n {
                                let gi = group.inv(g);
                                sum += irr.matrix(gi)[(i, l)] * irr.matrix(g)[(j, m)];
                            }
                            sum *= cr(d as f64 / n as f64);
                            let expected = if i == m && l == j { 1.0 } else { 0.0 };
                            assert!(
                                (sum - cr(expected)).norm() < 1e-10,
                                "({i},{l},{j},{m}): {sum}"
                            );
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn product_functions_respect_the_dimension_bound() {
    // the parametric invariant space generated by a d-dim block's basis is
    // spanned by pointwise products of basis functions: dimension <= d²,
    // and the product span is closed under the regular representation
    let act = triangle_action();
    let rep = Representation::regular(&act);
    let blocks = decompose(&rep, DEFAULT_DECOMPOSE_SEED).unwrap();
    let two = blocks.iter().find(|b| b.dim() == 2).unwrap();
    let basis = &two.basis;
    let mut products = CMat::zeros(6, 4);
    let mut col = 0;
    for i in 0..2 {
        for j in 0..2 {
            for p in 0..6 {
                products[(p, col)] = basis[(p, i)].conj() * basis[(p, j)];
            }
            col += 1;
        }
    }
    let dim = rank(&products, 1e-9);
    assert!(dim <= 4, "product span has dimension {dim}");
    for g in act.group().elements() {
        let moved = rep.matrix(g) * &products;
        assert!(spans(&products, &moved, 1e-8), "not invariant under {g}");
    }
}

#[test]
fn ordering_matches_subspace_inclusion() {
    // the factoring order matches subspace inclusion: θ₁ ⪯ θ₂ exactly
    // when V₁ ⊆ V₂
    let params = triangle_parameters();
    let mut all: Vec<ParametricFunction> = params.values().cloned().collect();
    all.push(ParametricFunction::constant("const", 6));
    all.push(ParametricFunction::identity(
        "id",
        triangle_action().point_names(),
    ));
    for t1 in &all {
        for t2 in &all {
            let v1 = parametric_basis(t1);
            let v2 = parametric_basis(t2);
            let order = compare(t1, t2);
            let included = spans(&v2, &v1, 1e-10);
            let expected = matches!(order, ParamOrder::Precedes | ParamOrder::Equivalent);
            assert_eq!(included, expected, "{} vs {}", t1.name, t2.name);
        }
    }
}

#[test]
fn intersection_of_parametric_subspaces() {
    // two permissible parameters on C6 whose ⪯-minimum is the constant:
    // the subspace intersection is the constants
    let group = Arc::new(FiniteGroup::cyclic(6).unwrap());
    let act = GroupAction::regular(group.clone());
    let full = Subgroup::full(group);
    let mod2 = ParametricFunction::new(
        "mod2",
        (0..6).map(|i| format!("{}", i % 2)).collect::<Vec<_>>(),
    );
    let mod3 = ParametricFunction::new(
        "mod3",
        (0..6).map(|i| format!("{}", i % 3)).collect::<Vec<_>>(),
    );
    assert!(is_permissible(&mod2, &act, &full).permissible);
    assert!(is_permissible(&mod3, &act, &full).permissible);
    let v2 = parametric_basis(&mod2);
    let v3 = parametric_basis(&mod3);
    // numerical intersection: vectors in both spans
    let mut joint = CMat::zeros(6, v2.ncols() + v3.ncols());
    joint.view_mut((0, 0), (6, v2.ncols())).copy_from(&v2);
    joint
        .view_mut((0, v2.ncols()), (6, v3.ncols()))
        .copy_from(&(-&v3));
    let inter_dim = v2.ncols() + v3.ncols() - rank(&joint, 1e-9);
    assert_eq!(inter_dim, 1);
    // the constant function lies in both
    let ones = CMat::from_element(6, 1, cr(1.0));
    assert!(spans(&v2, &ones, 1e-9) && spans(&v3, &ones, 1e-9));
}

#[test]
fn orbit_of_a_parametric_function_stays_in_its_subspace() {
    // Cor 2: for f₀ = f̃ ∘ θ with θ permissible, every U_R(g) f₀ stays in V
    let act = triangle_action();
    let rep = Representation::regular(&act);
    let theta0 = &triangle_parameters()["theta0"];
    let v = parametric_basis(theta0);
    let f0 = CVec::from_fn(6, |p, _| {
        if theta0.value(p) == "white" {
            cr(0.3)
        } else {
            cr(-1.2)
        }
    });
    for g in act.group().elements() {
        let moved = rep.matrix(g) * &f0;
        let as_mat = CMat::from_fn(6, 1, |r, _| moved[r]);
        assert!(spans(&v, &as_mat, 1e-10), "U({g}) f0 leaves V");
    }
}

#[test]
fn compound_of_permissible_parameters_is_permissible() {
    let group = Arc::new(FiniteGroup::cyclic(6).unwrap());
    let act = GroupAction::regular(group.clone());
    let full = Subgroup::full(group);
    let mod2 = ParametricFunction::new(
        "mod2",
        (0..6).map(|i| format!("{}", i % 2)).collect::<Vec<_>>(),
    );
    let mod3 = ParametricFunction::new(
        "mod3",
        (0..6).map(|i| format!("{}", i % 3)).collect::<Vec<_>>(),
    );
    let compound = mod2.compound(&mod3);
    assert!(is_permissible(&compound, &act, &full).permissible);
}

#[test]
fn order_independence_for_jointly_permissible_measurements() {
    // measuring mod2 then mod3 and the reverse leave the same compound
    // state whenever the outcomes match
    let group = Arc::new(FiniteGroup::cyclic(6).unwrap());
    let act = GroupAction::regular(group.clone());
    let mod2 = ParametricFunction::new(
        "mod2",
        (0..6).map(|i| format!("{}", i % 2)).collect::<Vec<_>>(),
    );
    let mod3 = ParametricFunction::new(
        "mod3",
        (0..6).map(|i| format!("{}", i % 3)).collect::<Vec<_>>(),
    );
    let mut outcomes_12: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    let mut outcomes_21: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for seed in 0..60 {
        let mut rng = rng_from_seed(seed);
        let s0 = State::haar(6);
        let (r1, s1) = measure(&s0, &mod2, &act, &mut rng).unwrap();
        let (r2, s2) = measure(&s1, &mod3, &act, &mut rng).unwrap();
        outcomes_12.insert((r1.outcome, r2.outcome), s2.distribution);
        let mut rng = rng_from_seed(seed + 1000);
        let (q2, t1) = measure(&s0, &mod3, &act, &mut rng).unwrap();
        let (q1, t2) = measure(&t1, &mod2, &act, &mut rng).unwrap();
        outcomes_21.insert((q1.outcome, q2.outcome), t2.distribution);
    }
    // all six joint outcomes occur and the final states agree pairwise
    assert_eq!(outcomes_12.len(), 6);
    assert_eq!(outcomes_21.len(), 6);
    for (key, d12) in &outcomes_12 {
        let d21 = &outcomes_21[key];
        for (a, b) in d12.iter().zip(d21) {
            assert!((a - b).abs() < 1e-12, "{key:?}");
        }
    }
}

#[test]
fn repeatability_exhaustive_over_triangle_states() {
    // from every pure state, re-measuring the focus parameter returns the
    // same value with probability one
    let params = triangle_parameters();
    for theta in params.values() {
        for value in theta.values() {
            let state = State::pure(theta, &value).unwrap();
            let dist = state.outcome_distribution(theta);
            for (v, p) in dist {
                let expected = if v == value { 1.0 } else { 0.0 };
                assert!((p - expected).abs() < 1e-12, "{}={}", theta.name, value);
            }
        }
    }
}

#[test]
fn measurement_frequencies_match_probabilities() {
    // 10⁵ draws at a fixed seed schedule stay within 0.01 of the exact
    // outcome distribution
    let act = triangle_action();
    let params = triangle_parameters();
    let theta_a = &params["theta_a"];
    let theta_b = &params["theta_b"];
    let state = State::pure(theta_a, "A").unwrap();
    let exact: BTreeMap<String, f64> = state.outcome_distribution(theta_b).into_iter().collect();
    let mut rng = rng_from_seed(0xFEED);
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let n = 100_000;
    for _ in 0..n {
        let (rec, _) = measure(&state, theta_b, &act, &mut rng).unwrap();
        *counts.entry(rec.outcome).or_default() += 1;
    }
    for (v, p) in &exact {
        let f = *counts.get(v).unwrap_or(&0) as f64 / n as f64;
        assert!((f - p).abs() <= 0.01, "{v}: {f} vs {p}");
    }
}

#[test]
fn triangle_joint_frequencies_follow_the_product_rule() {
    // fresh a-then-b sequences: joint outcome frequencies within 0.01 of
    // P(first) · P(second | first)
    let mut model = TriangleModel::new(0x5151, false).unwrap();
    let mut counts: BTreeMap<(String, String), usize> = BTreeMap::new();
    let n = 100_000;
    for _ in 0..n {
        model.reset();
        let a = model.open_window(symqt::triangle::Window::A).unwrap();
        let b = model.open_window(symqt::triangle::Window::B).unwrap();
        *counts.entry((a.outcome, b.outcome)).or_default() += 1;
    }
    assert_eq!(counts.len(), 6);
    for ((first, second), count) in &counts {
        let f = *count as f64 / n as f64;
        // P(first) = 1/3 and the conditional is 1/2 on each viable letter
        let expected = 1.0 / 6.0;
        assert!(
            (f - expected).abs() <= 0.01,
            "joint ({first}, {second}): {f}"
        );
    }
}

#[test]
fn conditional_expectation_projection_is_the_l2_minimizer() {
    // projection minimality: the level-average beats any competitor
    // built from the parameter
    let act = triangle_action();
    let full = Subgroup::full(act.group().clone());
    let theta0 = &triangle_parameters()["theta0"];
    let p = conditional_expectation_projection(theta0, &act, &full).unwrap();
    let mut rng = rng_from_seed(0x3333);
    for _ in 0..50 {
        let f = CVec::from_fn(6, |_, _| {
            c(
                rand::Rng::random::<f64>(&mut rng) - 0.5,
                rand::Rng::random::<f64>(&mut rng) - 0.5,
            )
        });
        let pf = &p.matrix * &f;
        let best = (&f - &pf).norm();
        for _ in 0..20 {
            let vals: Vec<num_complex::Complex64> = (0..2)
                .map(|_| {
                    c(
                        rand::Rng::random::<f64>(&mut rng) - 0.5,
                        rand::Rng::random::<f64>(&mut rng) - 0.5,
                    )
                })
                .collect();
            let competitor = CVec::from_fn(6, |phi, _| {
                if theta0.value(phi) == "white" {
                    vals[0]
                } else {
                    vals[1]
                }
            });
            assert!((&f - &competitor).norm() + 1e-12 >= best);
        }
    }
}

#[test]
fn trace_formula_is_reference_vector_independent() {
    // rebuilding the conditional-expectation operator from a different
    // admissible sample set changes the operator but not tr(Aρ) for states
    // built from the same family
    let model = TriangleModel::new(9, false).unwrap();
    let theta0 = &model.parameters["theta0"];
    let mut rng = rng_from_seed(0x909);
    let eta: Vec<f64> = (0..6).map(|_| rand::Rng::random::<f64>(&mut rng)).collect();
    let cond = |v: &str| -> f64 {
        let level = theta0.level_set_of_value(v).unwrap();
        level.iter().map(|&p| eta[p]).sum::<f64>() / level.len() as f64
    };
    // route 1: solve over the full family
    let all: Vec<usize> = (0..6).collect();
    let targets_all: Vec<f64> = all.iter().map(|&p| cond(theta0.value(p))).collect();
    let a1 = solve_parameter_operator(&model.space.family, &all, &targets_all).unwrap();
    assert!(
        a1.residual < 1e-8,
        "full-family solve should be exact for the color parameter"
    );
    // route 2: solve over the eigen-pair prespectrum only
    let (report, spectral) = &model.spectral["theta0"];
    let pair = report.prespectrum.clone();
    let targets_pair: Vec<f64> = pair.iter().map(|&p| cond(theta0.value(p))).collect();
    let a2 = solve_parameter_operator(&model.space.family, &pair, &targets_pair).unwrap();
    // the operators differ but the expectations agree
    let f_w = spectral.eigenvector("white").unwrap();
    let f_b = spectral.eigenvector("black").unwrap();
    let rho = symqt::operators::density_operator(&[f_w, f_b], &[0.45, 0.55], spectral.tag.clone())
        .unwrap();
    let t1 = (&a1.operator.matrix * rho.matrix()).trace().re;
    let t2 = (&a2.operator.matrix * rho.matrix()).trace().re;
    assert!((t1 - t2).abs() < 1e-8, "{t1} vs {t2}");
}

#[test]
fn spectra_invariant_under_relabelings() {
    // value-alphabet relabeling and a right-translation of the point set
    // leave the numeric spectrum unchanged
    let space = symqt::triangle::triangle_state_space().unwrap();
    let params = triangle_parameters();
    let encodings = triangle_encodings();
    let theta_a = &params["theta_a"];
    let (base_report, _) = a_spectrum(theta_a, &space, &encodings["theta_a"]).unwrap();
    let base_values: Vec<f64> = base_report.spectrum.iter().map(|(_, v)| *v).collect();

    // relabel letters A/B/C -> X/Y/Z with matching encodings
    let relabel = |l: &str| match l {
        "A" => "X".to_string(),
        "B" => "Y".to_string(),
        _ => "Z".to_string(),
    };
    let theta_x = ParametricFunction::new(
        "theta_x",
        theta_a
            .labels
            .iter()
            .map(|l| relabel(l))
            .collect::<Vec<_>>(),
    );
    let enc_x: Vec<(String, f64)> = encodings["theta_a"]
        .iter()
        .map(|(l, v)| (relabel(l), *v))
        .collect();
    let (report_x, _) = a_spectrum(&theta_x, &space, &enc_x).unwrap();
    let values_x: Vec<f64> = report_x.spectrum.iter().map(|(_, v)| *v).collect();
    assert_eq!(base_values, values_x);

    // right-translation relabeling of the point set: the regular
    // representation matrices commute with right translations, so with the
    // base point renamed along, the coherent family is the same family
    // under new point names and the spectrum's value set is unchanged
    let group = space.action.group().clone();
    let g0 = 2usize;
    let perm: Vec<usize> = group.elements().map(|p| group.mul(p, g0)).collect();
    let mut labels = vec![String::new(); 6];
    for (p, &img) in perm.iter().enumerate() {
        labels[img] = theta_a.labels[p].clone();
    }
    let theta_t = ParametricFunction::new("theta_t", labels);
    let f0 = space.family.vectors[space.family.base_point].clone();
    let space_t = symqt::space::StateSpace::with_reference_vector(
        space.action.clone(),
        space.seed,
        symqt::space::StateSpaceSelector::Index(space.m_index),
        perm[0],
        &f0,
    )
    .unwrap();
    // the relabeled family is the original one under new names
    for p in 0..6 {
        let diff = (&space_t.family.vectors[perm[p]] - &space.family.vectors[p]).norm();
        assert!(diff < 1e-12, "family not transported at {p}");
    }
    let (report_t, _) = a_spectrum(&theta_t, &space_t, &encodings["theta_a"]).unwrap();
    let mut values_t: Vec<f64> = report_t.spectrum.iter().map(|(_, v)| *v).collect();
    values_t.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut base_sorted = base_values.clone();
    base_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(base_sorted, values_t);
    // the renamed prespectrum is still an eigen-aligned candidate (the
    // winner may be a different representative; prespectra are not unique)
    let renamed: Vec<usize> = {
        let mut v: Vec<usize> = base_report.prespectrum.iter().map(|&p| perm[p]).collect();
        v.sort();
        v
    };
    assert!(report_t
        .candidates
        .iter()
        .any(|cand| cand.aligned && cand.subset == renamed));
}

#[test]
fn build_operator_round_trip_on_d4() {
    // forward-generate c from a block-diagonal operator, rebuild, and check
    // the defining identity at every group element
    let group = Arc::new(FiniteGroup::dihedral(4).unwrap());
    let act = GroupAction::regular(group.clone());
    let rep = Representation::regular(&act);
    let blocks = decompose(&rep, DEFAULT_DECOMPOSE_SEED).unwrap();
    let mut rng = rng_from_seed(44);
    let mut draw = || {
        c(
            rand::Rng::random::<f64>(&mut rng) - 0.5,
            rand::Rng::random::<f64>(&mut rng) - 0.5,
        )
    };
    let f0_raw = CVec::from_fn(8, |_, _| draw());
    let f0 = f0_raw.clone().unscale(f0_raw.norm());
    // random Hermitian assembled block-diagonally
    let mut a_star = CMat::zeros(8, 8);
    for b in &blocks {
        let d = b.dim();
        let h = CMat::from_fn(d, d, |_, _| draw());
        let h = (&h + h.adjoint()).scale(0.5);
        a_star += &b.basis * h * b.basis.adjoint();
    }
    let c_fn: Vec<num_complex::Complex64> = group
        .elements()
        .map(|g| {
            let fg = rep.matrix(g) * &f0;
            (fg.adjoint() * &a_star * &fg)[(0, 0)]
        })
        .collect();
    let built = build_operator(&rep, &blocks, &f0, &c_fn).unwrap();
    assert!(built.residual <= 1e-8);
    for g in group.elements() {
        let fg = rep.matrix(g) * &f0;
        let got = (fg.adjoint() * &built.operator.matrix * &fg)[(0, 0)];
        assert!((got - c_fn[g]).norm() <= 1e-8, "element {g}");
    }
}

#[test]
fn refinement_detects_function_of() {
    let id = ParametricFunction::from_strs("id", &["1", "2", "3", "4"]);
    let coarse = ParametricFunction::from_strs("c", &["x", "x", "y", "y"]);
    assert!(refines(&id, &coarse));
    assert!(!refines(&coarse, &id));
}

#[test]
fn solve_routes_agree_on_random_instances() {
    // normal equations vs orthogonal factorization on forward-generated
    // targets over the S3 and D4 two-dimensional blocks
    use symqt::linalg::{max_norm, LstsqMethod};
    use symqt::operators::solve_operator_irreducible;
    for group in [
        FiniteGroup::symmetric(3).unwrap(),
        FiniteGroup::dihedral(4).unwrap(),
    ] {
        let group = Arc::new(group);
        let act = GroupAction::regular(group.clone());
        let rep = Representation::regular(&act);
        let blocks = decompose(&rep, DEFAULT_DECOMPOSE_SEED).unwrap();
        let two = blocks.iter().find(|b| b.dim() == 2).unwrap();
        let irrep = rep.restrict(&two.basis).unwrap();
        for trial in 0..25u64 {
            let mut rng = rng_from_seed(0xD0D0 + trial);
            let mut draw = || {
                c(
                    rand::Rng::random::<f64>(&mut rng) - 0.5,
                    rand::Rng::random::<f64>(&mut rng) - 0.5,
                )
            };
            let h = CMat::from_fn(2, 2, |_, _| draw());
            let q_star = (&h + h.adjoint()).scale(0.5);
            let v0 = CVec::from_fn(2, |_, _| draw());
            let v = v0.clone().unscale(v0.norm());
            let c_fn: Vec<num_complex::Complex64> = group
                .elements()
                .map(|g| {
                    let uv = irrep.matrix(g) * &v;
                    (uv.adjoint() * &q_star * &uv)[(0, 0)]
                })
                .collect();
            let ne = solve_operator_irreducible(&irrep, &v, &c_fn, LstsqMethod::NormalEquations)
                .unwrap();
            let sv = solve_operator_irreducible(&irrep, &v, &c_fn, LstsqMethod::Svd).unwrap();
            assert!(max_norm(&(&ne.operator.matrix - &sv.operator.matrix)) < 1e-8);
            assert!(max_norm(&(&ne.operator.matrix - &q_star)) < 1e-8);
        }
    }
}
