//! Long-input datasets: snippets placed inside benign filler text.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::GoldSnippet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedConfig {
    pub seed: u64,
}

/// A uniformly drawn insertion point in `filler`, moved forward to the next
/// whitespace so no word is split. Returns a byte offset.
pub fn embed_offset(rng: &mut impl Rng, filler: &str) -> usize {
    if filler.is_empty() {
        return 0;
    }
    let mut raw = rng.gen_range(0..=filler.len());
    while !filler.is_char_boundary(raw) {
        raw += 1;
    }
    filler[raw..].find(char::is_whitespace).map_or(filler.len(), |p| raw + p)
}

/// Each entry of `snippets` is wrapped in a filler document chosen and
/// split at a seeded offset. Gold labels and ids are kept. The output is a
/// pure function of the inputs and seed.
pub fn build_embedded_dataset(snippets: &[GoldSnippet], fillers: &[String], config: EmbedConfig) -> Vec<GoldSnippet> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    snippets
        .iter()
        .map(|s| {
            if fillers.is_empty() {
                return GoldSnippet { embed_offset: Some(0), ..s.clone() };
            }
            let filler = &fillers[rng.gen_range(0..fillers.len())];
            let at = embed_offset(&mut rng, filler);
            let text = format!("{}\n{}\n{}", &filler[..at], s.text, &filler[at..]);
            GoldSnippet { id: s.id.clone(), text, gold: s.gold.clone(), embed_offset: Some(at + 1) }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::{CategoryLabel, LabelSet};

    fn filler() -> Vec<String> {
        vec!["lorem ipsum dolor sit amet ".repeat(40), "consectetur adipiscing elit sed do ".repeat(30)]
    }

    fn snippets() -> Vec<GoldSnippet> {
        (0..300)
            .map(|i| GoldSnippet {
                id: i.to_string(),
                text: format!("snippet {i}"),
                gold: if i < 200 { LabelSet::new([CategoryLabel::Pii]) } else { LabelSet::other() },
                embed_offset: None,
            })
            .collect()
    }

    #[test]
    fn deterministic_and_shaped() {
        let a = build_embedded_dataset(&snippets(), &filler(), EmbedConfig { seed: 7 });
        let b = build_embedded_dataset(&snippets(), &filler(), EmbedConfig { seed: 7 });
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.len(), 300);
        assert_eq!(a.iter().filter(|g| !g.gold.is_other()).count(), 200);
        for (g, s) in a.iter().zip(snippets()) {
            let off = g.embed_offset.unwrap();
            assert!(g.text[off..].starts_with(&s.text));
        }
    }

    #[test]
    fn offsets_cover_thirds() {
        // Counting oracle: over 1,000 draws each third of the filler receives
        // a share near one third.
        let f = "word ".repeat(600);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut thirds = [0usize; 3];
        for _ in 0..1000 {
            let off = embed_offset(&mut rng, &f);
            thirds[(off * 3 / (f.len() + 1)).min(2)] += 1;
        }
        assert!(thirds.iter().all(|&c| (250..=420).contains(&c)), "{thirds:?}");
    }
}
