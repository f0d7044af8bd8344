use crate::bitmap::GrayBitmap;

/// One bit per pixel, `true` = ink.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), width * height, "bit buffer size mismatch");
        Self { width, height, bits }
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self::new(width, height, vec![false; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, ink: bool) {
        self.bits[y * self.width + x] = ink;
    }

    pub fn ink_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn inverted(&self) -> BinaryImage {
        BinaryImage::new(self.width, self.height, self.bits.iter().map(|b| !b).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threshold {
    Otsu,
    Fixed(u8),
}

pub fn histogram(img: &GrayBitmap) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for &p in img.pixels() {
        hist[p as usize] += 1;
    }
    hist
}

/// Otsu's threshold `t` for the rule "ink iff gray < t": the smallest `t`
/// maximising the between-class variance of the split `[0, t) | [t, 255]`.
/// Returns 0 (nothing is ink) when no split has both classes populated.
pub fn otsu_threshold(hist: &[u64; 256]) -> u8 {
    let total: u64 = hist.iter().sum();
    let total_sum: u128 = hist.iter().enumerate().map(|(v, &n)| v as u128 * n as u128).sum();
    let (mut n0, mut s0) = (0u64, 0u128);
    let mut best = (0u8, f64::NEG_INFINITY);
    for t in 1..=255usize {
        n0 += hist[t - 1];
        s0 += (t as u128 - 1) * hist[t - 1] as u128;
        let n1 = total - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let s1 = total_sum - s0;
        // n0*n1*(mu0 - mu1)^2 scaled by n0*n1: (s0*n1 - s1*n0)^2 / (n0*n1)
        let diff = s0 as i128 * n1 as i128 - s1 as i128 * n0 as i128;
        let variance = (diff as f64) * (diff as f64) / (n0 as f64 * n1 as f64);
        if variance > best.1 {
            best = (t as u8, variance);
        }
    }
    best.0
}

pub fn binarize(img: &GrayBitmap, method: Threshold) -> BinaryImage {
    let t = match method {
        Threshold::Fixed(t) => t,
        Threshold::Otsu => otsu_threshold(&histogram(img)),
    };
    BinaryImage::new(
        img.width(),
        img.height(),
        img.pixels().iter().map(|&p| p < t).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Between-class variance straight from the class means.
    fn brute_otsu(pixels: &[u8]) -> u8 {
        let mut best = (0u8, f64::NEG_INFINITY);
        for t in 1..=255u32 {
            let (lo, hi): (Vec<u8>, Vec<u8>) = pixels.iter().partition(|&&p| (p as u32) < t);
            if lo.is_empty() || hi.is_empty() {
                continue;
            }
            let mean = |v: &[u8]| v.iter().map(|&p| p as f64).sum::<f64>() / v.len() as f64;
            let w0 = lo.len() as f64 / pixels.len() as f64;
            let w1 = 1.0 - w0;
            let var = w0 * w1 * (mean(&lo) - mean(&hi)).powi(2);
            if var > best.1 * (1.0 + 1e-12) {
                best = (t as u8, var);
            }
        }
        best.0
    }

    #[test]
    fn fixed_threshold_extremes() {
        let black = GrayBitmap::filled(4, 3, 0).unwrap();
        assert_eq!(binarize(&black, Threshold::Fixed(128)).ink_count(), 12);
        let white = GrayBitmap::filled(4, 3, 255).unwrap();
        assert_eq!(binarize(&white, Threshold::Fixed(128)).ink_count(), 0);
    }

    #[test]
    fn otsu_splits_two_levels() {
        let pixels: Vec<u8> = (0..64).map(|i| if i % 2 == 0 { 40 } else { 200 }).collect();
        let img = GrayBitmap::new(8, 8, pixels.clone()).unwrap();
        let t = otsu_threshold(&histogram(&img));
        assert_eq!(t, brute_otsu(&pixels));
        let bin = binarize(&img, Threshold::Otsu);
        for (b, p) in bin.bits().iter().zip(&pixels) {
            assert_eq!(*b, *p == 40);
        }
    }

    #[test]
    fn otsu_uniform_image_has_no_ink() {
        let img = GrayBitmap::filled(5, 5, 77).unwrap();
        assert_eq!(otsu_threshold(&histogram(&img)), 0);
        assert_eq!(binarize(&img, Threshold::Otsu).ink_count(), 0);
    }

    #[test]
    fn otsu_matches_brute_force_on_random_images() {
        use rand::Rng;
        let mut rng = crate::rng::seeded(42);
        for _ in 0..200 {
            let n = rng.gen_range(2..60);
            let levels: Vec<u8> = (0..rng.gen_range(1..5)).map(|_| rng.gen()).collect();
            let pixels: Vec<u8> = (0..n).map(|_| levels[rng.gen_range(0..levels.len())]).collect();
            let img = GrayBitmap::new(n, 1, pixels.clone()).unwrap();
            let t = otsu_threshold(&histogram(&img));
            let bt = brute_otsu(&pixels);
            // thresholds on the same plateau give identical masks
            let mask = |t: u8| pixels.iter().map(|&p| p < t).collect::<Vec<_>>();
            assert_eq!(mask(t), mask(bt), "levels {levels:?}");
        }
    }
}
