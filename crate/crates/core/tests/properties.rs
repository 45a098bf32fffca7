use fsl::cone::{surgery, SurgeryResult};
use fsl::fmod::Grading;
use fsl::knotmodel::KnotModel;
use fsl::numth::{casson_walker_surgery, lambda_from_hf, lens, lens_d, CassonWalkerInput, LensInvariants};
use fsl::obstruct::{chi_relation, straddles, v0_bound, z_special, Outcome, Rule, TargetSummary};
use fsl::rational::Rational;
use fsl::shipped;
use num_integer::Integer;
use proptest::prelude::*;

fn model(name: &str) -> KnotModel {
    shipped::model(name).unwrap().unwrap()
}

fn coprime() -> impl Strategy<Value = (i64, i64)> {
    (1i64..9, 1i64..14).prop_filter("coprime", |(p, q)| p.gcd(q) == 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn unknot_surgery_is_lens_space((p, q) in coprime()) {
        let r = surgery(&model("unknot_s3"), p, q, None).unwrap();
        prop_assert_eq!(r.dim_red, 0);
        let d: Vec<Rational> = r.d_table().into_iter().map(Grading::into_value).collect();
        prop_assert_eq!(d, lens_d(p, q).unwrap());
    }

    #[test]
    fn casson_walker_matches_hf(idx in 0usize..5, (p, q) in coprime()) {
        let m = model(shipped::MODEL_NAMES[idx]);
        let r = surgery(&m, p, q, None).unwrap();
        let lambda_y = lambda_from_hf(m.ambient.chi_red(), m.ambient.d.value(), 1);
        let input = CassonWalkerInput { lambda_y, h1_order: 1, delta2: m.torsion_coefficients().delta2, p, q };
        prop_assert_eq!(lambda_from_hf(r.chi_red, &r.d_sum, p), casson_walker_surgery(&input).unwrap());
    }

    #[test]
    fn reversal_is_an_involution(idx in 0usize..5, (p, q) in coprime()) {
        let r = surgery(&model(shipped::MODEL_NAMES[idx]), p, q, None).unwrap();
        let rr = r.reversed();
        prop_assert_eq!(rr.dim_red, r.dim_red);
        prop_assert_eq!(rr.chi_red, -r.chi_red);
        prop_assert_eq!(rr.reversed(), r);
    }

    #[test]
    fn surgery_json_round_trips(idx in 0usize..5, (p, q) in coprime()) {
        let r = surgery(&model(shipped::MODEL_NAMES[idx]), p, q, None).unwrap();
        let text = serde_json::to_string_pretty(&r).unwrap();
        let back: SurgeryResult = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(serde_json::to_string_pretty(&back).unwrap(), text);
        prop_assert_eq!(back, r);
    }

    #[test]
    fn lens_json_round_trips((p, q) in (1i64..80, 1i64..80).prop_filter("coprime", |(p, q)| p.gcd(q) == 1)) {
        let inv = lens(p, q).unwrap();
        let text = serde_json::to_string(&inv).unwrap();
        prop_assert_eq!(serde_json::from_str::<LensInvariants>(&text).unwrap(), inv);
    }

    #[test]
    fn v0_bound_is_monotone_in_dim(p in 1i64..8, q in 1i64..40, dim in 0usize..30, extra in 0usize..10) {
        prop_assume!(p.gcd(&q) == 1);
        let t = model("trefoil_rh_s3");
        let small = TargetSummary::new(p, dim, (dim % 2) as i64).unwrap();
        let large = TargetSummary::new(p, dim + 2 * extra, (dim % 2) as i64).unwrap();
        let a = v0_bound(&t, &small, p, q).unwrap();
        let b = v0_bound(&t, &large, p, q).unwrap();
        prop_assert!(!(a.outcome == Outcome::Pass && b.outcome == Outcome::Fail));
    }

    #[test]
    fn z_special_agrees_with_chi_relation(p in 2i64..9, h1 in 2i64..9, chi in -9i64..10, q1 in 1i64..30, q2 in 1i64..30) {
        prop_assume!(p.gcd(&q1) == 1 && p.gcd(&q2) == 1 && q1 != q2);
        let z = TargetSummary::new(h1, chi.unsigned_abs() as usize, chi).unwrap();
        let [_, divis] = chi_relation(0, &z, p);
        prop_assert_eq!(divis.rule, Rule::ChiDivis);
        let zs = z_special(&z, p, &[q1, q2]);
        if straddles(p, q1, q2) && divis.outcome == Outcome::Fail && chi.rem_euclid(h1) != 0 {
            prop_assert_eq!(zs.outcome, Outcome::Fail);
        }
    }
}
