mod common;

use common::iban_oracle::{generate_valid, mutate, oracle_valid, spaced};
use latexposed::patterns::{registered_length, validate_iban};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ours(s: &str) -> Option<bool> {
    validate_iban(s).ok()
}

#[test]
fn hundred_valid_hundred_mutated() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1BA4);
    let valid: Vec<String> = (0..100).map(|_| generate_valid(&mut rng)).collect();
    let invalid: Vec<String> = valid.iter().map(|v| mutate(v, &mut rng)).collect();
    for v in &valid {
        assert_eq!(oracle_valid(v), Some(true), "{v}");
        assert_eq!(ours(v), Some(true), "{v}");
        assert_eq!(ours(&spaced(v)), Some(true), "{v}");
        assert_eq!(ours(&v.to_ascii_lowercase()), Some(true), "{v}");
        assert_eq!(registered_length(&v[..2]), Some(v.len()), "{v}");
    }
    for m in &invalid {
        assert_eq!(oracle_valid(m), Some(false), "{m}");
        assert_eq!(ours(m), Some(false), "{m}");
    }
}

#[test]
fn published_examples() {
    for s in ["GB82 WEST 1234 5698 7654 32", "DE89 3704 0044 0532 0130 00", "NL91ABNA0417164300"] {
        assert_eq!(ours(s), Some(true));
        assert_eq!(oracle_valid(s), Some(true));
    }
}

proptest! {
    #[test]
    fn agrees_on_arbitrary_shapes(s in "[A-Z]{2}[0-9]{2}[A-Z0-9]{11,30}") {
        prop_assert_eq!(ours(&s), oracle_valid(&s));
    }

    #[test]
    fn agrees_on_noise(s in "[A-Za-z0-9 ]{0,40}") {
        prop_assert_eq!(ours(&s), oracle_valid(&s));
    }
}
