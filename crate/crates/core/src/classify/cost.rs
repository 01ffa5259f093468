//! Exact decimal cost and reduction arithmetic.

use rust_decimal::Decimal;

const MILLION: Decimal = Decimal::from_parts(1_000_000, 0, 0, false, 0);

/// `tokens / 1e6 * price_per_m`, exact.
pub fn estimate_cost(tokens: u64, price_per_m: Decimal) -> Decimal {
    (Decimal::from(tokens) * price_per_m / MILLION).normalize()
}

/// Input cost plus output cost when an output price is configured.
pub fn estimate_total_cost(input: u64, output: u64, price_in: Decimal, price_out: Option<Decimal>) -> Decimal {
    let out = price_out.map_or(Decimal::ZERO, |p| estimate_cost(output, p));
    (estimate_cost(input, price_in) + out).normalize()
}

/// `1 - after / before`; zero when `before` is zero.
pub fn reduction(before: u64, after: u64) -> Decimal {
    if before == 0 {
        return Decimal::ZERO;
    }
    Decimal::ONE - Decimal::from(after) / Decimal::from(before)
}

/// A fraction as a percentage rounded half-up to `dp` places.
pub fn as_percent(fraction: Decimal, dp: u32) -> Decimal {
    (fraction * Decimal::ONE_HUNDRED)
        .round_dp_with_strategy(dp, rust_decimal::RoundingStrategy::MidpointAwayFromZero)
        .normalize()
}
