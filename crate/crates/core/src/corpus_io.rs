//! On-disk corpus file set:
//!
//! * `docs.txt.gz`: gzip text, one document per line, space-separated token indices
//! * `dictionary.json`: token index to word string
//! * `ground_truth.json`: generator config, seed, `phi` and `theta`

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use ndarray::Array2;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::json;
use crate::simgen::GeneratorConfig;
use crate::types::{nested_rows, Corpus, GroundTruthModel, Vocabulary};

pub const DOCS_FILE: &str = "docs.txt.gz";
pub const DICTIONARY_FILE: &str = "dictionary.json";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.json";

/// Serializes `{"0": "w0", "1": "w1", ...}` in index order.
pub struct Dictionary<'a>(pub &'a Vocabulary);

impl Serialize for Dictionary<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.size()))?;
        for i in 0..self.0.size() {
            map.serialize_entry(&i.to_string(), &self.0.word(i))?;
        }
        map.end()
    }
}

#[derive(Serialize)]
struct GroundTruthOut<'a> {
    config: &'a GeneratorConfig,
    seed: u64,
    #[serde(with = "nested_rows")]
    phi: &'a Array2<f64>,
    #[serde(with = "nested_rows")]
    theta: &'a Array2<f64>,
    includes_function_topic: bool,
}

#[derive(Deserialize)]
struct GroundTruthIn {
    config: GeneratorConfig,
    seed: u64,
    #[serde(with = "nested_rows")]
    phi: Array2<f64>,
    #[serde(with = "nested_rows")]
    theta: Array2<f64>,
    includes_function_topic: bool,
}

/// Gzip-compressed documents, one per line.
pub fn encode_docs(docs: &[Vec<usize>]) -> Result<Vec<u8>> {
    let mut enc = GzEncoder::new(Vec::new(), Compression::default());
    let mut line = String::new();
    for doc in docs {
        line.clear();
        for (i, w) in doc.iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            line.push_str(&w.to_string());
        }
        line.push('\n');
        enc.write_all(line.as_bytes())?;
    }
    Ok(enc.finish()?)
}

pub fn decode_docs<R: std::io::Read>(reader: R) -> Result<Vec<Vec<usize>>> {
    let mut docs = Vec::new();
    for (i, line) in BufReader::new(GzDecoder::new(reader)).lines().enumerate() {
        let line = line?;
        let doc = line
            .split_ascii_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|e| Error::Input(format!("line {}: {e}", i + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        docs.push(doc);
    }
    Ok(docs)
}

/// Serialized ground truth (config, seed, phi, theta).
pub fn ground_truth_json(corpus: &Corpus, truth: &GroundTruthModel) -> Result<Vec<u8>> {
    let mut bytes = json::to_vec(&GroundTruthOut {
        config: &corpus.gen_params,
        seed: corpus.seed,
        phi: &truth.phi,
        theta: &truth.theta,
        includes_function_topic: truth.includes_function_topic,
    })?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes the three corpus files into `dir`, creating it if needed.
pub fn write_corpus(dir: &Path, corpus: &Corpus, truth: &GroundTruthModel) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(DOCS_FILE), encode_docs(&corpus.docs)?)?;
    json::write_file(&dir.join(DICTIONARY_FILE), &Dictionary(&corpus.vocab))?;
    std::fs::write(
        dir.join(GROUND_TRUTH_FILE),
        ground_truth_json(corpus, truth)?,
    )?;
    Ok(())
}

/// Reads a `ground_truth.json` file on its own.
pub fn read_ground_truth(path: &Path) -> Result<(GeneratorConfig, GroundTruthModel)> {
    let gt: GroundTruthIn = json::read_file(path)?;
    let truth = GroundTruthModel {
        phi: gt.phi,
        theta: gt.theta,
        includes_function_topic: gt.includes_function_topic,
    };
    truth.validate(&gt.config.vocabulary()?, gt.config.k_m + 1)?;
    Ok((gt.config, truth))
}

/// Reads a corpus file set back.
pub fn read_corpus(dir: &Path) -> Result<(Corpus, GroundTruthModel)> {
    let docs = decode_docs(BufReader::new(File::open(dir.join(DOCS_FILE))?))?;
    let gt: GroundTruthIn = json::read_file(&dir.join(GROUND_TRUTH_FILE))?;
    let dictionary: HashMap<String, String> = json::read_file(&dir.join(DICTIONARY_FILE))?;
    if dictionary.len() != gt.config.v {
        return Err(Error::Input(format!(
            "dictionary has {} entries, config says V = {}",
            dictionary.len(),
            gt.config.v
        )));
    }
    let corpus = Corpus {
        docs,
        vocab: gt.config.vocabulary()?,
        seed: gt.seed,
        gen_params: gt.config,
    };
    corpus.validate()?;
    let truth = GroundTruthModel {
        phi: gt.phi,
        theta: gt.theta,
        includes_function_topic: gt.includes_function_topic,
    };
    Ok((corpus, truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::Preset;
    use crate::simgen::generate_corpus;

    #[test]
    fn round_trip_and_byte_stability() {
        let dir = tempfile::tempdir().unwrap();
        let (corpus, truth) = generate_corpus(&Preset::Smaller.generator(12, 5)).unwrap();
        write_corpus(dir.path(), &corpus, &truth).unwrap();
        let (c2, t2) = read_corpus(dir.path()).unwrap();
        assert_eq!(c2, corpus);
        assert_eq!(t2, truth);
        let (cfg, t3) = read_ground_truth(&dir.path().join(GROUND_TRUTH_FILE)).unwrap();
        assert_eq!((cfg, t3), (corpus.gen_params.clone(), truth.clone()));

        let first: Vec<Vec<u8>> = [DOCS_FILE, DICTIONARY_FILE, GROUND_TRUTH_FILE]
            .iter()
            .map(|f| std::fs::read(dir.path().join(f)).unwrap())
            .collect();
        let again = tempfile::tempdir().unwrap();
        let (corpus, truth) = generate_corpus(&Preset::Smaller.generator(12, 5)).unwrap();
        write_corpus(again.path(), &corpus, &truth).unwrap();
        for (f, bytes) in [DOCS_FILE, DICTIONARY_FILE, GROUND_TRUTH_FILE]
            .iter()
            .zip(first)
        {
            assert_eq!(std::fs::read(again.path().join(f)).unwrap(), bytes, "{f}");
        }
    }

    #[test]
    fn dictionary_is_in_index_order() {
        let vocab = Vocabulary::plain(12).unwrap();
        let text = String::from_utf8(json::to_vec(&Dictionary(&vocab)).unwrap()).unwrap();
        assert!(text.starts_with(r#"{"0":"w0","1":"w1","2":"w2""#), "{text}");
        assert!(text.ends_with(r#""11":"w11"}"#));
    }

    #[test]
    fn docs_text_layout() {
        let bytes = encode_docs(&[vec![1, 2, 3], vec![40]]).unwrap();
        let mut text = String::new();
        std::io::Read::read_to_string(&mut GzDecoder::new(&bytes[..]), &mut text).unwrap();
        assert_eq!(text, "1 2 3\n40\n");
        assert_eq!(
            decode_docs(&bytes[..]).unwrap(),
            vec![vec![1, 2, 3], vec![40]]
        );
    }
}
