use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{compose_scene, emit_voc_xml, render_plate, AnnotatedScene, CorpusError, PlateStyle, SaltPepper};
use crate::bitmap::BoundingBox;
use crate::pgm;
use crate::rng;
use crate::text::{normalize_plate, PlateString};

pub const MANIFEST_FILE: &str = "manifest.tsv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusConfig {
    pub count: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Characters plates are drawn from.
    pub alphabet: String,
    pub style: PlateStyle,
    pub canvas_w: usize,
    pub canvas_h: usize,
    pub noise_rate: f64,
    pub seed: u64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            count: 433,
            min_len: 4,
            max_len: 8,
            alphabet: "0123456789".into(),
            style: PlateStyle::default(),
            canvas_w: 320,
            canvas_h: 240,
            noise_rate: 0.0,
            seed: 0,
        }
    }
}

impl CorpusConfig {
    fn validate(&self) -> Result<(), CorpusError> {
        if self.count == 0 {
            return Err(CorpusError::Config("count must be at least 1".into()));
        }
        if self.min_len == 0 || self.min_len > self.max_len || self.max_len > 16 {
            return Err(CorpusError::Config(format!(
                "plate length range {}..={} is invalid",
                self.min_len, self.max_len
            )));
        }
        if self.alphabet.is_empty() {
            return Err(CorpusError::Config("alphabet is empty".into()));
        }
        let (w, h) = self.style.plate_size(self.max_len);
        if w > self.canvas_w || h > self.canvas_h {
            return Err(CorpusError::Config(format!(
                "a {w}x{h} plate does not fit the {}x{} canvas",
                self.canvas_w, self.canvas_h
            )));
        }
        Ok(())
    }
}

pub fn image_id(index: usize) -> String {
    format!("img_{index:04}")
}

/// Draws a random plate text of a length in `min_len..=max_len`.
pub fn random_plate<R: Rng>(rng: &mut R, alphabet: &[char], min_len: usize, max_len: usize) -> PlateString {
    let len = rng.gen_range(min_len..=max_len);
    let text: String = (0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect();
    normalize_plate(&text).expect("alphabet characters are plate-safe")
}

/// Builds the scenes in memory. Scene `i` uses its own substream of `seed`,
/// and the draw order does not depend on `noise_rate`, so the same config at
/// two noise levels yields the same plates at the same offsets.
pub fn generate_scenes(cfg: &CorpusConfig) -> Result<Vec<AnnotatedScene>, CorpusError> {
    cfg.validate()?;
    let alphabet: Vec<char> = cfg.alphabet.chars().collect();
    if let Some(&c) = alphabet.iter().find(|c| !crate::font::supports(**c)) {
        return Err(CorpusError::UnsupportedChar(c));
    }
    (0..cfg.count)
        .map(|i| {
            let mut rng = rng::stream(cfg.seed, i as u64);
            let text = random_plate(&mut rng, &alphabet, cfg.min_len, cfg.max_len);
            let render_seed: u64 = rng.gen();
            let plate = render_plate(&text, &cfg.style, render_seed)?;
            let x = rng.gen_range(0..=cfg.canvas_w - plate.width());
            let y = rng.gen_range(0..=cfg.canvas_h - plate.height());
            let noise = SaltPepper {
                rate: cfg.noise_rate,
                seed: rng.gen(),
            };
            compose_scene(&image_id(i), &plate, &text, cfg.canvas_w, cfg.canvas_h, (x, y), noise)
        })
        .collect()
}

pub fn manifest_line(scene: &AnnotatedScene) -> String {
    format!("{}\t{}\t{}\n", scene.image_id, scene.plate_text.normalized(), scene.truth)
}

/// Writes `<id>.pgm`, `<id>.xml` and `manifest.tsv` into `dir`.
pub fn write_corpus(dir: &Path, scenes: &[AnnotatedScene]) -> Result<(), CorpusError> {
    fs::create_dir_all(dir)?;
    let mut manifest = String::new();
    for scene in scenes {
        pgm::write(&dir.join(format!("{}.pgm", scene.image_id)), &scene.image)?;
        fs::write(dir.join(format!("{}.xml", scene.image_id)), emit_voc_xml(scene))?;
        manifest.push_str(&manifest_line(scene));
    }
    fs::write(dir.join(MANIFEST_FILE), manifest)?;
    Ok(())
}

pub fn generate_corpus(cfg: &CorpusConfig, dir: &Path) -> Result<Vec<AnnotatedScene>, CorpusError> {
    let scenes = generate_scenes(cfg)?;
    write_corpus(dir, &scenes)?;
    Ok(scenes)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub image_id: String,
    pub plate_text: PlateString,
    pub truth: BoundingBox,
}

pub fn read_manifest(dir: &Path) -> Result<Vec<ManifestEntry>, CorpusError> {
    let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(n, line)| {
            let bad = |reason: &str| CorpusError::Manifest {
                line: n + 1,
                reason: reason.to_string(),
            };
            let mut cols = line.split('\t');
            let (Some(id), Some(plate), Some(coords), None) = (cols.next(), cols.next(), cols.next(), cols.next()) else {
                return Err(bad("expected three tab-separated columns"));
            };
            let nums = coords
                .split(',')
                .map(|v| v.parse::<u32>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| bad("non-integer coordinate"))?;
            let [xmin, ymin, xmax, ymax] = nums[..] else {
                return Err(bad("expected four coordinates"));
            };
            Ok(ManifestEntry {
                image_id: id.to_string(),
                plate_text: normalize_plate(plate).map_err(|e| bad(&e.to_string()))?,
                truth: BoundingBox::new(xmin, ymin, xmax, ymax).map_err(|e| bad(&e.to_string()))?,
            })
        })
        .collect()
}
