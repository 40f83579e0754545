use proptest::prelude::*;
use rsbekk::bekk::cov_step;
use rsbekk::estimation::{from_unconstrained, to_unconstrained};
use rsbekk::regime::{ex_ante_step, filter_step, recombine, stationary_dist};
use rsbekk::{BekkParams, Cov2, MeanParams, ModelParams, ModelSpec, RsModelParams, YearMonth};

fn cov() -> impl Strategy<Value = Cov2> {
    (1e-4f64..10.0, 1e-4f64..10.0, -0.99f64..0.99)
        .prop_map(|(a, b, r)| Cov2::new(a, b, r * (a * b).sqrt()).unwrap())
}

fn mean(restricted: bool) -> impl Strategy<Value = MeanParams> {
    prop::array::uniform6(-5.0f64..5.0).prop_map(move |v| MeanParams {
        l10: v[0],
        l11: v[1],
        l12: v[2],
        l20: v[3],
        l21: if restricted { 0.0 } else { v[4] },
        l22: if restricted { 0.0 } else { v[5] },
    })
}

fn bekk(restricted: bool) -> impl Strategy<Value = BekkParams> {
    (mean(restricted), prop::array::uniform7(-2.0f64..2.0)).prop_map(|(mean, v)| BekkParams {
        mean,
        c11: v[0],
        c12: v[1],
        c22: v[2],
        a11: v[3],
        a22: v[4],
        b11: v[5],
        b22: v[6],
    })
}

fn prob() -> impl Strategy<Value = f64> {
    0.001f64..0.999
}

fn model(restricted: bool) -> impl Strategy<Value = (ModelParams, ModelSpec)> {
    prop_oneof![
        bekk(restricted).prop_map(move |b| (ModelParams::Single(b), ModelSpec::single(restricted))),
        (bekk(restricted), bekk(restricted), prob(), prob()).prop_map(move |(r1, r2, p, q)| {
            (
                ModelParams::Switching(RsModelParams::new(r1, r2, p, q).unwrap()),
                ModelSpec::switching(restricted),
            )
        }),
    ]
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs())
}

fn bekk_close(a: &BekkParams, b: &BekkParams) -> bool {
    let m = |x: &BekkParams| {
        [x.mean.l10, x.mean.l11, x.mean.l12, x.mean.l20, x.mean.l21, x.mean.l22, x.c11, x.c12, x.c22, x.a11, x.a22, x.b11, x.b22]
    };
    m(a).iter().zip(m(b).iter()).all(|(x, y)| close(*x, *y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn unconstrained_round_trip((params, spec) in (any::<bool>()).prop_flat_map(model)) {
        let u = to_unconstrained(&params, &spec).unwrap();
        let back = from_unconstrained(&u, &spec).unwrap();
        match (params, back) {
            (ModelParams::Single(a), ModelParams::Single(b)) => prop_assert!(bekk_close(&a, &b)),
            (ModelParams::Switching(a), ModelParams::Switching(b)) => {
                prop_assert!(bekk_close(&a.regime1, &b.regime1));
                prop_assert!(bekk_close(&a.regime2, &b.regime2));
                prop_assert!(close(a.p, b.p) && close(a.q, b.q));
            }
            _ => prop_assert!(false, "kind changed"),
        }
    }
}

proptest! {
    #[test]
    fn model_params_serde_round_trip((params, _) in (any::<bool>()).prop_flat_map(model)) {
        let json = serde_json::to_string(&params).unwrap();
        let back: ModelParams = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(params, back);
    }

    #[test]
    fn cov_serde_round_trip(c in cov()) {
        let back: Cov2 = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        prop_assert_eq!(c, back);
    }

    #[test]
    fn indefinite_cov_rejected_on_deserialize(a in 0.1f64..2.0, b in 0.1f64..2.0, extra in 1.01f64..3.0) {
        let smb = extra * (a * b).sqrt();
        let json = format!(r#"{{"smm":{a},"sbb":{b},"smb":{smb}}}"#);
        prop_assert!(serde_json::from_str::<Cov2>(&json).is_err());
    }

    #[test]
    fn month_round_trip(y in 1900i32..2100, m in 1u8..=12) {
        let ym = YearMonth::new(y, m).unwrap();
        prop_assert_eq!(ym.to_string().parse::<YearMonth>().unwrap(), ym);
        prop_assert_eq!(ym.range(13)[12].year(), y + 1);
    }

    #[test]
    fn probabilities_stay_on_simplex(
        p in 0.0f64..=1.0, q in 0.0f64..=1.0, a in 0.0f64..=1.0,
        d1 in 1e-200f64..1e3, d2 in 1e-200f64..1e3,
    ) {
        let ea = ex_ante_step([a, 1.0 - a], p, q);
        prop_assert!((ea[0] + ea[1] - 1.0).abs() <= 1e-12 && ea[0] >= 0.0 && ea[1] >= 0.0);
        if let Some(f) = filter_step(ea, d1, d2) {
            prop_assert!((f[0] + f[1] - 1.0).abs() <= 1e-12 && f[0] >= 0.0 && f[1] >= 0.0);
        }
        if p + q < 2.0 {
            let pi = stationary_dist(p, q).unwrap();
            let next = ex_ante_step(pi, p, q);
            prop_assert!((next[0] - pi[0]).abs() <= 1e-12);
        }
    }

    #[test]
    fn recursion_and_mixture_stay_psd(
        h1 in cov(), h2 in cov(), b in bekk(false),
        e in prop::array::uniform2(-10.0f64..10.0),
        m1 in prop::array::uniform2(-3.0f64..3.0), m2 in prop::array::uniform2(-3.0f64..3.0),
        w in 0.0f64..=1.0,
    ) {
        prop_assert!(cov_step(&h1, e, &b).is_psd(1e-12));
        let (_, agg) = recombine([w, 1.0 - w], m1, m2, &h1, &h2, [0.0, 0.0]);
        prop_assert!(agg.is_psd(1e-12));
    }
}
