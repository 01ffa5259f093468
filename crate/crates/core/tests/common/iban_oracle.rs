//! Independent IBAN checksum: the rearranged string expanded to one decimal
//! integer, reduced with arbitrary precision.

use num_bigint::BigUint;
use rand::Rng;

pub fn expand(compact: &str) -> String {
    let rearranged = format!("{}{}", &compact[4..], &compact[..4]);
    rearranged
        .chars()
        .map(|c| if c.is_ascii_digit() { c.to_string() } else { (c as u32 - 'A' as u32 + 10).to_string() })
        .collect()
}

pub fn shape_ok(compact: &str) -> bool {
    let c: Vec<char> = compact.chars().collect();
    (15..=34).contains(&c.len())
        && c[..2].iter().all(|x| x.is_ascii_uppercase())
        && c[2..4].iter().all(|x| x.is_ascii_digit())
        && c[4..].iter().all(|x| x.is_ascii_digit() || x.is_ascii_uppercase())
}

/// `None` when the text is not IBAN-shaped.
pub fn oracle_valid(candidate: &str) -> Option<bool> {
    let compact: String = candidate.chars().filter(|c| *c != ' ').collect::<String>().to_ascii_uppercase();
    if !shape_ok(&compact) {
        return None;
    }
    let n: BigUint = expand(&compact).parse().unwrap();
    Some(n % 97u32 == BigUint::from(1u32))
}

/// (country, total length) for a few registered countries.
pub const COUNTRIES: &[(&str, usize)] = &[
    ("DE", 22),
    ("GB", 22),
    ("FR", 27),
    ("NL", 18),
    ("ES", 24),
    ("IT", 27),
    ("CH", 21),
    ("BE", 16),
    ("NO", 15),
    ("MT", 31),
];

const ALNUM: &[u8] = b"0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";

pub fn generate_valid(rng: &mut impl Rng) -> String {
    let (cc, len) = COUNTRIES[rng.gen_range(0..COUNTRIES.len())];
    let bban: String = (0..len - 4)
        .map(|_| {
            if rng.gen_bool(0.8) {
                (b'0' + rng.gen_range(0..10)) as char
            } else {
                ALNUM[rng.gen_range(10..36)] as char
            }
        })
        .collect();
    let n: BigUint = expand(&format!("{cc}00{bban}")).parse().unwrap();
    let r: u32 = (n % 97u32).try_into().unwrap();
    format!("{cc}{:02}{bban}", 98 - r)
}

/// A checksum-invalid variant: one substituted character, an adjacent swap,
/// or altered check digits.
pub fn mutate(valid: &str, rng: &mut impl Rng) -> String {
    loop {
        let mut c: Vec<u8> = valid.bytes().collect();
        match rng.gen_range(0..3) {
            0 => {
                let i = rng.gen_range(4..c.len());
                c[i] = ALNUM[rng.gen_range(0..10)];
            }
            1 => {
                let i = rng.gen_range(4..c.len() - 1);
                c.swap(i, i + 1);
            }
            _ => {
                c[2] = b'0' + rng.gen_range(0..10);
                c[3] = b'0' + rng.gen_range(0..10);
            }
        }
        let s = String::from_utf8(c).unwrap();
        if oracle_valid(&s) == Some(false) {
            return s;
        }
    }
}

/// Groups of four separated by spaces, as printed on statements.
pub fn spaced(compact: &str) -> String {
    compact.as_bytes().chunks(4).map(|ch| std::str::from_utf8(ch).unwrap()).collect::<Vec<_>>().join(" ")
}
