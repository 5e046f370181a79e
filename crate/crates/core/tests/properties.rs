use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use udw_core::channels::{build_channel, plus_y, Backend, Channel, ChannelSpec};
use udw_core::field::{make_model, overlap, standard_model, FockRep, Generator};
use udw_core::metrics::{coherent_information, diamond_distance, DiamondOptions};
use udw_core::noise::{crosstalk_factor, effective_coupling, CouplingSign, CrosstalkMethod, NoiseParams};
use udw_core::operator::{entropy, CMatrix, Operator, C64};

fn ginibre(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    })
}

fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    ginibre(rng, d, d).qr().q()
}

/// Kraus operators cut from a random isometry `d_in → k·d_out`.
fn random_channel(seed: u64, d_in: usize, d_out: usize, k: usize) -> Channel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = ginibre(&mut rng, k * d_out, d_in).qr().q();
    let kraus: Vec<CMatrix> = (0..k).map(|i| v.rows(i * d_out, d_out).into_owned()).collect();
    Channel::from_kraus(&kraus, "random").unwrap()
}

fn random_density(seed: u64, d: usize) -> Operator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = ginibre(&mut rng, d, d);
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    Operator::from_matrix(rho / tr)
}

fn generator() -> impl Strategy<Value = Generator> {
    (any::<bool>(), -1.0..1.0_f64).prop_map(|(phi, c)| if phi { Generator::phi(c) } else { Generator::pi(c) })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn displacement_product_matches_fock(
        lambda in 0.4..1.5_f64,
        gens in prop::collection::vec(generator(), 1..4),
    ) {
        let params = standard_model(lambda).unwrap();
        let fock = FockRep::new(&params, 90).unwrap();
        let product = gens
            .iter()
            .fold(CMatrix::identity(90, 90), |acc, &g| acc * fock.exp_generator(g));
        let vac = fock.vacuum();
        let numeric = vac.dotc(&(product * &vac));
        let symbolic = params.payload_displacement(&gens).vacuum_expectation();
        prop_assert!((numeric - symbolic).norm() < 1e-9, "{numeric} vs {symbolic}");
    }

    #[test]
    fn overlap_error_decreases_with_coupling(a in 0.01..4.0_f64, step in 1e-3..1.0_f64) {
        let eps = |l: f64| {
            let p = standard_model(l).unwrap();
            overlap(-p.alpha_phi(), p.alpha_phi()).norm()
        };
        prop_assert!(eps(a + step) < eps(a));
    }

    #[test]
    fn overlap_identities(
        ar in -3.0..3.0_f64, ai in -3.0..3.0_f64,
        br in -3.0..3.0_f64, bi in -3.0..3.0_f64,
    ) {
        let (a, b) = (C64::new(ar, ai), C64::new(br, bi));
        prop_assert!((overlap(a, a) - 1.0).norm() < 1e-12);
        prop_assert!((overlap(b, a) - overlap(a, b).conj()).norm() < 1e-12);
        prop_assert!((overlap(b, a).norm_sqr() - (-(a - b).norm_sqr()).exp()).abs() < 1e-12);
    }

    #[test]
    fn choi_round_trip(seed in any::<u64>(), d_in in 1usize..4, d_out in 1usize..4, k in 1usize..4) {
        let ch = random_channel(seed, d_in, d_out, k);
        prop_assert!(ch.check_cptp().is_ok());
        let back = Channel::from_choi(&ch.choi(), "round trip").unwrap();
        prop_assert!(ch.max_abs_diff(&back).unwrap() < 1e-12);
    }

    #[test]
    fn coherent_information_bounded_by_input_entropy(seed in any::<u64>(), k in 1usize..5) {
        let ch = random_channel(seed, 2, 2, k);
        let rho = random_density(seed ^ 0x5eed, 2);
        let ic = coherent_information(&ch, &rho).unwrap();
        prop_assert!(ic <= entropy(&rho).unwrap() + 1e-9);
        prop_assert!(ic >= -entropy(&rho).unwrap() - 1e-9);
    }

    #[test]
    fn crosstalk_closed_form_matches_quadrature(g in 0.01..4.0_f64, a in 0.25..4.0_f64, b in 0.0..4.0_f64) {
        let p = NoiseParams::new(g, a, b).unwrap();
        let closed = crosstalk_factor(&p, CrosstalkMethod::Closed).unwrap();
        let quad = crosstalk_factor(&p, CrosstalkMethod::Quadrature).unwrap();
        prop_assert!((closed - quad).abs() < 1e-8);
    }

    #[test]
    fn noiseless_coupling_is_unchanged(lambda in 0.0..5.0_f64, a in 0.1..4.0_f64) {
        let p = NoiseParams::new(0.5, a, 0.0).unwrap();
        for sign in [CouplingSign::AsPrinted, CouplingSign::QuadratureMatched] {
            prop_assert_eq!(effective_coupling(lambda, &p, sign).unwrap(), lambda);
        }
    }

    #[test]
    fn field_qst_is_cptp_and_bounded(lambda in 0.1..4.0_f64, gamma in 0.1..1.5_f64) {
        let params = make_model(lambda, gamma, udw_core::field::default_smear_norm()).unwrap();
        let ch = build_channel(&ChannelSpec::FieldQst { params, bob: plus_y() }, Backend::Symbolic).unwrap();
        prop_assert!(ch.check_cptp().is_ok());
        let c = udw_core::metrics::capacity_n1(&ch).unwrap();
        prop_assert!((-1.0 - 1e-9..=1.0 + 1e-9).contains(&c));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn diamond_triangle_inequality(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chans: Vec<Channel> = (0..3)
            .map(|_| Channel::from_unitary(&Operator::from_matrix(random_unitary(&mut rng, 2)), "U").unwrap())
            .collect();
        let opts = DiamondOptions { coarse_samples: 2_000, ..DiamondOptions::default() };
        let d = |a: usize, b: usize| diamond_distance(&chans[a], &chans[b], &opts).unwrap().value;
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-9);
        prop_assert!((d(0, 1) - d(1, 0)).abs() < 1e-6);
    }

    #[test]
    fn symbolic_and_fock_agree(lambda in 0.3..2.5_f64) {
        let spec = ChannelSpec::field_qst(standard_model(lambda).unwrap());
        let sym = build_channel(&spec, Backend::Symbolic).unwrap();
        let fock = build_channel(&spec, Backend::Fock { n_max: None }).unwrap();
        prop_assert!(sym.max_abs_diff(&fock).unwrap() < 1e-8);
    }
}
