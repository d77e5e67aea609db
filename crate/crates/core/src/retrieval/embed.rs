use thiserror::Error;

pub const DEFAULT_DIMENSION: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmbedError {
    #[error("cannot embed empty text")]
    EmptyText,
    #[error("embedder unavailable: {0}")]
    Unavailable(String),
}

/// Text to unit vector.
pub trait Embedder {
    /// Stable identifier recorded in store headers.
    fn id(&self) -> &str;
    fn dimension(&self) -> usize;
    fn embed(&self, text: &str) -> Result<Vec<f64>, EmbedError>;
}

/// Deterministic local embedder: hashes character trigrams and whole words
/// of the lowercased text into buckets, then L2-normalizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NgramEmbedder {
    dimension: usize,
    id: String,
}

impl NgramEmbedder {
    pub fn new(dimension: usize) -> Self {
        assert!(dimension > 0, "embedding dimension must be positive");
        NgramEmbedder {
            dimension,
            id: format!("ngram3-fnv1a/{dimension}"),
        }
    }
}

impl Default for NgramEmbedder {
    fn default() -> Self {
        NgramEmbedder::new(DEFAULT_DIMENSION)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

impl Embedder for NgramEmbedder {
    fn id(&self) -> &str {
        &self.id
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, EmbedError> {
        let words: Vec<String> = text
            .split(|c: char| !c.is_alphanumeric())
            .filter(|w| !w.is_empty())
            .map(str::to_lowercase)
            .collect();
        if words.is_empty() {
            return Err(EmbedError::EmptyText);
        }
        let mut v = vec![0.0; self.dimension];
        let mut bump = |feature: &str| {
            v[(fnv1a(feature.as_bytes()) % self.dimension as u64) as usize] += 1.0;
        };
        for w in &words {
            bump(&format!("w:{w}"));
            let padded: Vec<char> = format!(" {w} ").chars().collect();
            for gram in padded.windows(3) {
                bump(&gram.iter().collect::<String>());
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        Ok(v)
    }
}

/// Cosine similarity; zero when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}
