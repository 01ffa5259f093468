use std::str::FromStr;

use latexposed::classify::{as_percent, estimate_cost, reduction};
use num_rational::Ratio;
use rust_decimal::Decimal;

fn d(s: &str) -> Decimal {
    Decimal::from_str(s).unwrap()
}

/// tokens * price / 1e6 as an exact fraction. `price` is given in cents
/// per million so it stays integral.
fn cost_oracle(tokens: i128, cents_per_m: i128) -> Ratio<i128> {
    Ratio::new(tokens * cents_per_m, 100 * 1_000_000)
}

fn ratio_of(x: Decimal) -> Ratio<i128> {
    Ratio::new(x.mantissa(), 10i128.pow(x.scale()))
}

#[test]
fn input_cost_of_cleaned_corpus() {
    let c = estimate_cost(224_000_000, d("0.07"));
    assert_eq!(c, d("15.68"));
    assert_eq!(ratio_of(c), cost_oracle(224_000_000, 7));
}

#[test]
fn reduction_from_raw_to_cleaned() {
    let r = reduction(2_400_000_000, 275_000_000);
    assert_eq!(as_percent(r, 1), d("88.5"));
    assert_eq!(as_percent(r, 0), d("89"));
    let exact = Ratio::new(1i128, 1) - Ratio::new(275_000_000i128, 2_400_000_000);
    assert_eq!(exact, Ratio::new(425, 480));
    // 88.54166...%, so both roundings above are exact consequences.
    assert!(exact * 100 > Ratio::new(885, 10) && exact * 100 < Ratio::new(886, 10));
}

#[test]
fn premium_model_cost() {
    let c = estimate_cost(275_000_000, d("1.25"));
    assert_eq!(c, d("343.75"));
    assert_eq!(ratio_of(c), cost_oracle(275_000_000, 125));
    // Rounded to two significant figures the figure reads 340.
    assert_eq!(c.round_sf(2).unwrap(), d("340"));
}

#[test]
fn oracle_agrees_on_grid() {
    for tokens in [0u64, 1, 999_999, 1_000_000, 123_456_789, 2_400_000_000] {
        for cents in [1i128, 7, 125, 1500] {
            let price = Decimal::new(cents as i64, 2);
            assert_eq!(
                ratio_of(estimate_cost(tokens, price)),
                cost_oracle(tokens as i128, cents),
                "{tokens} @ {price}"
            );
        }
    }
}
