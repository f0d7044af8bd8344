use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{AnnotatedScene, CorpusError};
use crate::bitmap::GrayBitmap;
use crate::rng;
use crate::text::PlateString;

pub const CANVAS_SHADE: u8 = 128;
pub const MAX_NOISE_RATE: f64 = 0.2;

/// Impulse noise: each pixel independently becomes 0 or 255 with
/// probability `rate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaltPepper {
    pub rate: f64,
    pub seed: u64,
}

impl SaltPepper {
    pub fn none() -> Self {
        Self { rate: 0.0, seed: 0 }
    }
}

/// Places `plate` on a mid-gray canvas at `offset`, then applies noise.
/// The truth box is exactly the blit rectangle.
pub fn compose_scene(
    image_id: &str,
    plate: &GrayBitmap,
    plate_text: &PlateString,
    canvas_w: usize,
    canvas_h: usize,
    offset: (usize, usize),
    noise: SaltPepper,
) -> Result<AnnotatedScene, CorpusError> {
    if !(0.0..=MAX_NOISE_RATE).contains(&noise.rate) {
        return Err(CorpusError::NoiseRate(noise.rate));
    }
    let (x, y) = offset;
    if x + plate.width() > canvas_w || y + plate.height() > canvas_h {
        return Err(CorpusError::OutOfBounds {
            plate_w: plate.width(),
            plate_h: plate.height(),
            x,
            y,
            canvas_w,
            canvas_h,
        });
    }
    let mut image = GrayBitmap::filled(canvas_w, canvas_h, CANVAS_SHADE)?;
    let truth = image.blit(plate, x, y)?;

    if noise.rate > 0.0 {
        let mut rng = rng::seeded(noise.seed);
        for py in 0..canvas_h {
            for px in 0..canvas_w {
                // two draws per pixel regardless of outcome keeps the stream aligned
                let hit = rng.gen_bool(noise.rate);
                let salt = rng.gen_bool(0.5);
                if hit {
                    image.set(px, py, if salt { 255 } else { 0 });
                }
            }
        }
    }
    Ok(AnnotatedScene {
        image_id: image_id.to_string(),
        image,
        truth,
        plate_text: plate_text.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitmap::BoundingBox;
    use crate::text::normalize_plate;

    fn plate() -> GrayBitmap {
        GrayBitmap::new(100, 40, (0..4000).map(|i| (i % 7) as u8 * 30).collect()).unwrap()
    }

    #[test]
    fn truth_is_blit_rectangle() {
        let text = normalize_plate("1").unwrap();
        let s = compose_scene("a", &plate(), &text, 200, 100, (10, 20), SaltPepper::none()).unwrap();
        assert_eq!(s.truth, BoundingBox::new(10, 20, 110, 60).unwrap());
        assert_eq!(s.image.crop(&s.truth).unwrap(), plate());
        for y in 0..100 {
            for x in 0..200 {
                let inside = (10..110).contains(&x) && (20..60).contains(&y);
                if !inside {
                    assert_eq!(s.image.get(x, y), CANVAS_SHADE);
                }
            }
        }
    }

    #[test]
    fn noise_is_deterministic_and_bounded() {
        let text = normalize_plate("1").unwrap();
        let noise = SaltPepper { rate: 0.05, seed: 99 };
        let a = compose_scene("a", &plate(), &text, 200, 100, (10, 20), noise).unwrap();
        let b = compose_scene("a", &plate(), &text, 200, 100, (10, 20), noise).unwrap();
        assert_eq!(a, b);
        let flipped = a
            .image
            .pixels()
            .iter()
            .filter(|&&p| p == 0 || p == 255)
            .count();
        let rate = flipped as f64 / 20_000.0;
        assert!((0.03..0.08).contains(&rate), "{rate}");
        assert!(matches!(
            compose_scene("a", &plate(), &text, 200, 100, (0, 0), SaltPepper { rate: 0.3, seed: 1 }),
            Err(CorpusError::NoiseRate(_))
        ));
    }

    #[test]
    fn rejects_overflowing_offsets() {
        let text = normalize_plate("1").unwrap();
        assert!(matches!(
            compose_scene("a", &plate(), &text, 200, 100, (101, 0), SaltPepper::none()),
            Err(CorpusError::OutOfBounds { .. })
        ));
    }
}
