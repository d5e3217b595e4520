use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sphereprobe::intersect::intersection;
use sphereprobe::mcg::{dehn_twist, half_twist, MappingClassWord, HALF_TWIST_SQUARE_SIGN};
use sphereprobe::overlay::{fills, Overlay};
use sphereprobe::{Curve, Preset};

fn preset() -> impl Strategy<Value = Preset> {
    prop_oneof![Just(Preset::S05Fig1), Just(Preset::S05Sorted), Just(Preset::S06Sorted)]
}

/// A random curve: the image of a chord curve under a short random word.
fn random_curve(p: Preset, seed: u64, len: usize) -> Curve {
    let s = p.surface();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = s.puncture_count() as u8;
    let a = 1 + (seed % n as u64) as u8;
    let b = 1 + ((seed / 7 + 1 + a as u64) % n as u64) as u8;
    let b = if a == b { a % n + 1 } else { b };
    let w = MappingClassWord::random(&s, len, &mut rng);
    w.apply(&Curve::standard(&s, a, b).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coordinates_round_trip(p in preset(), seed in 0u64..10_000, len in 0usize..6) {
        let c = random_curve(p, seed, len);
        let back = Curve::from_coords(c.surface(), c.coords()).unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn overlay_agrees_with_linked_pairs(p in preset(), s1 in 0u64..10_000, s2 in 0u64..10_000) {
        let a = random_curve(p, s1, 4);
        let b = random_curve(p, s2, 4);
        let i = intersection(&a, &b).unwrap();
        prop_assert_eq!(i, intersection(&b, &a).unwrap());
        prop_assert_eq!(i % 2, 0);
        if a != b {
            prop_assert_eq!(Overlay::new(&a, &b).unwrap().crossing_count(), i);
        }
    }

    #[test]
    fn twist_is_bilinear(p in preset(), s1 in 0u64..10_000, s2 in 0u64..10_000, n in -5i64..=5) {
        let a = random_curve(p, s1, 3);
        let b = random_curve(p, s2, 3);
        let i = intersection(&a, &b).unwrap();
        let tb = dehn_twist(&a, n, &b).unwrap();
        prop_assert_eq!(intersection(&tb, &b).unwrap(), n.unsigned_abs() * i * i);
        prop_assert_eq!(intersection(&tb, &a).unwrap(), i);
    }

    #[test]
    fn action_preserves_intersection_and_filling(p in preset(), s1 in 0u64..10_000, s2 in 0u64..10_000, ws in 0u64..10_000) {
        let a = random_curve(p, s1, 3);
        let b = random_curve(p, s2, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(ws);
        let w = MappingClassWord::random(a.surface(), 5, &mut rng);
        let (wa, wb) = (w.apply(&a).unwrap(), w.apply(&b).unwrap());
        prop_assert_eq!(intersection(&wa, &wb).unwrap(), intersection(&a, &b).unwrap());
        prop_assert_eq!(fills(&wa, &wb).unwrap(), fills(&a, &b).unwrap());
    }

    #[test]
    fn half_twist_squares_to_full(s1 in 0u64..10_000, s2 in 0u64..10_000) {
        let c = random_curve(Preset::S05Fig1, s1, 3);
        let b = random_curve(Preset::S05Fig1, s2, 3);
        prop_assert_eq!(half_twist(&c, 2, &b).unwrap(), dehn_twist(&c, HALF_TWIST_SQUARE_SIGN, &b).unwrap());
        prop_assert_eq!(half_twist(&c, 1, &c).unwrap(), c);
    }
}
