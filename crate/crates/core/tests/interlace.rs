use hoqmc::interlace::{box_image, deinterlace_index, BAdicBox};
use hoqmc::netgen::{builtin_matrices, generate_net, t_value, verify_net, Construction, NetSpec};
use hoqmc::{deinterlace_point, interlace_index, interlace_point, walsh, walsh_multi, Base, DigitPoint, WalshIndex};
use num_rational::Ratio;
use proptest::prelude::*;

fn digits(b: u32, len: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0..b as u8, len)
}

/// `d` coordinates of `w` digits each in base `b`.
fn coordinates() -> impl Strategy<Value = (u32, Vec<Vec<u8>>)> {
    (prop::sample::select(vec![2u32, 3, 5]), 1usize..=4, 1usize..=10).prop_flat_map(|(b, d, w)| {
        (Just(b), prop::collection::vec(digits(b, w), d))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn points_round_trip((b, coords) in coordinates()) {
        let base = Base::new(b).unwrap();
        let xs: Vec<DigitPoint> = coords.iter().map(|c| DigitPoint::from_digits(base, c).unwrap()).collect();
        let y = interlace_point(&xs).unwrap();
        prop_assert_eq!(y.precision(), xs.len() * xs[0].precision());
        prop_assert_eq!(deinterlace_point(&y, xs.len()).unwrap(), xs);
    }

    #[test]
    fn indices_round_trip(b in prop::sample::select(vec![2u32, 3, 7]), ks in prop::collection::vec(0u64..500, 1..=3)) {
        let base = Base::new(b).unwrap();
        let ks: Vec<WalshIndex> = ks.into_iter().map(|k| WalshIndex::new(k, base)).collect();
        let k = interlace_index(&ks).unwrap();
        prop_assert_eq!(deinterlace_index(k, ks.len()), ks);
    }

    /// `wal_{D_d(k)}(D_d(x)) = Π_r wal_{k_r}(x_r)`.
    #[test]
    fn walsh_functions_factor((b, coords) in coordinates(), seed in any::<u64>()) {
        let base = Base::new(b).unwrap();
        let xs: Vec<DigitPoint> = coords.iter().map(|c| DigitPoint::from_digits(base, c).unwrap()).collect();
        let w = xs[0].precision() as u32;
        let limit = base.pow(w.min(6)).unwrap();
        let ks: Vec<WalshIndex> = (0..xs.len() as u64)
            .map(|r| WalshIndex::new(seed.rotate_left(13 * r as u32) % limit, base))
            .collect();
        let lhs = walsh(interlace_index(&ks).unwrap(), &interlace_point(&xs).unwrap());
        prop_assert_eq!(lhs, walsh_multi(&ks, &xs).unwrap());
    }

    /// The image of a box is a union of intervals of the same total measure.
    #[test]
    fn box_image_keeps_volume(b in prop::sample::select(vec![2u32, 3]), levels in prop::collection::vec(0u32..=3, 2..=3), seed in any::<u64>()) {
        let base = Base::new(b).unwrap();
        let anchors: Vec<u64> = levels.iter().enumerate()
            .map(|(r, &nu)| seed.rotate_left(17 * r as u32) % base.pow(nu).unwrap())
            .collect();
        let bx = BAdicBox { base, levels, anchors };
        let image = box_image(&bx).unwrap();
        let total: Ratio<u128> = image.iter().map(|iv| iv.length(base)).sum();
        prop_assert_eq!(total, bx.volume());
    }
}

/// Interlacing groups of `d` coordinates of a digital `(t, m, ds)`-net
/// gives a `(t, m, s)`-net: every elementary interval of the image pulls
/// back to an elementary interval of the same volume.
#[test]
fn interlacing_keeps_the_net_property() {
    for (c, b, s, d, m_max) in [
        (Construction::Faure, 5, 2, 2, 4),
        (Construction::Faure, 3, 1, 3, 5),
        (Construction::Sobol, 2, 2, 2, 8),
        (Construction::Sobol, 2, 1, 3, 8),
        (Construction::Sobol, 2, 3, 2, 7),
    ] {
        let base = Base::new(b).unwrap();
        for m in 1..=m_max {
            let g = builtin_matrices(c, base, s * d, m as usize).unwrap();
            let t = t_value(&g).unwrap();
            let net = generate_net(&g, NetSpec::new(base, m, s, d).unwrap()).unwrap();
            let y = net.interlace(d).unwrap();
            assert_eq!(y.dimension(), s);
            assert!(verify_net(&y, t).unwrap().passed, "{c} b={b} s={s} d={d} m={m} t={t}");
        }
    }
}
