use std::fs;
use std::path::PathBuf;

use latexposed::exif::{read_exif, ImageFormat};
use num_rational::Ratio;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/exif")
}

fn expected() -> Vec<Value> {
    serde_json::from_str(&fs::read_to_string(dir().join("expected.json")).unwrap()).unwrap()
}

/// Degrees + minutes/60 + seconds/3600 in exact arithmetic, signed by the
/// hemisphere reference.
fn exact(parts: &Value, reference: &Value) -> Ratio<i128> {
    let mut total = Ratio::from_integer(0i128);
    let mut scale = Ratio::from_integer(1i128);
    for p in parts.as_array().unwrap() {
        let n = p[0].as_i64().unwrap() as i128;
        let d = p[1].as_i64().unwrap() as i128;
        total += Ratio::new(n, d) * scale;
        scale /= 60;
    }
    if matches!(reference.as_str(), Some("S") | Some("W")) {
        -total
    } else {
        total
    }
}

fn to_f64(r: Ratio<i128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[test]
fn gps_within_micro_degree_of_exact() {
    let mut with_gps = 0;
    for case in expected() {
        let name = case["file"].as_str().unwrap();
        let bytes = fs::read(dir().join(name)).unwrap();
        let meta = read_exif(&bytes, name).unwrap();
        assert_eq!(meta.format, if name.ends_with(".png") { ImageFormat::Png } else { ImageFormat::Jpeg });
        assert_eq!(meta.make.as_deref(), case["make"].as_str(), "{name}");
        assert_eq!(meta.model.as_deref(), case["model"].as_str(), "{name}");
        assert_eq!(meta.software.as_deref(), case["software"].as_str(), "{name}");
        assert_eq!(meta.timestamp.as_deref(), case["datetime"].as_str(), "{name}");
        if case.get("lat").is_some() {
            with_gps += 1;
            let g = meta.gps.unwrap_or_else(|| panic!("{name}: no gps"));
            let lat = to_f64(exact(&case["lat"], &case["lat_ref"]));
            let lon = to_f64(exact(&case["lon"], &case["lon_ref"]));
            assert!((g.lat - lat).abs() < 1e-6, "{name}: {} vs {lat}", g.lat);
            assert!((g.lon - lon).abs() < 1e-6, "{name}: {} vs {lon}", g.lon);
            let sidecar_lat: f64 = case["lat_exact"].as_str().unwrap().parse().unwrap();
            assert!((sidecar_lat.abs() - lat.abs()).abs() < 1e-9);
        } else {
            assert!(meta.gps.is_none(), "{name}");
        }
    }
    assert_eq!(with_gps, 2);
}

#[test]
fn every_truncation_is_handled() {
    for case in expected() {
        let bytes = fs::read(dir().join(case["file"].as_str().unwrap())).unwrap();
        for cut in 0..=bytes.len() {
            let _ = read_exif(&bytes[..cut], "t");
        }
    }
}

#[test]
fn random_corruption_is_handled() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in expected() {
        let bytes = fs::read(dir().join(case["file"].as_str().unwrap())).unwrap();
        for _ in 0..2000 {
            let mut b = bytes.clone();
            for _ in 0..rng.gen_range(1..8) {
                let i = rng.gen_range(0..b.len());
                b[i] = rng.gen();
            }
            let cut = rng.gen_range(0..=b.len());
            let _ = read_exif(&b[..cut], "c");
        }
    }
}

proptest! {
    #[test]
    fn arbitrary_bytes_after_magic(
        magic in prop::sample::select(vec![&b"\xff\xd8"[..], b"\x89PNG\r\n\x1a\n", b"II*\0", b"MM\0*"]),
        tail in prop::collection::vec(any::<u8>(), 0..512),
    ) {
        let mut b = magic.to_vec();
        b.extend(tail);
        prop_assert!(read_exif(&b, "p").is_ok());
    }
}
