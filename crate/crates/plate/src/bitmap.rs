use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitmapError {
    #[error("bitmap dimensions must be at least 1x1 (got {width}x{height})")]
    EmptyDimensions { width: usize, height: usize },
    #[error("pixel buffer holds {actual} bytes, expected {expected}")]
    BufferSize { expected: usize, actual: usize },
    #[error("box ({xmin},{ymin},{xmax},{ymax}) is degenerate")]
    DegenerateBox {
        xmin: u32,
        ymin: u32,
        xmax: u32,
        ymax: u32,
    },
    #[error("box ({xmin},{ymin},{xmax},{ymax}) exceeds {width}x{height} image")]
    OutOfBounds {
        xmin: u32,
        ymin: u32,
        xmax: u32,
        ymax: u32,
        width: usize,
        height: usize,
    },
}

/// 8-bit grayscale image, row-major. 0 is black ink, 255 is white.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GrayBitmap {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl std::fmt::Debug for GrayBitmap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GrayBitmap")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl GrayBitmap {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, BitmapError> {
        if width == 0 || height == 0 {
            return Err(BitmapError::EmptyDimensions { width, height });
        }
        if pixels.len() != width * height {
            return Err(BitmapError::BufferSize {
                expected: width * height,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, shade: u8) -> Result<Self, BitmapError> {
        Self::new(width, height, vec![shade; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.pixels[y * self.width + x] = value;
    }

    /// Whole-image box.
    pub fn bounds(&self) -> BoundingBox {
        BoundingBox {
            xmin: 0,
            ymin: 0,
            xmax: self.width as u32,
            ymax: self.height as u32,
        }
    }

    /// Copies the region covered by `bbox`.
    pub fn crop(&self, bbox: &BoundingBox) -> Result<GrayBitmap, BitmapError> {
        bbox.check_within(self.width, self.height)?;
        let mut out = Vec::with_capacity(bbox.area() as usize);
        for y in bbox.ymin as usize..bbox.ymax as usize {
            let row = y * self.width;
            out.extend_from_slice(&self.pixels[row + bbox.xmin as usize..row + bbox.xmax as usize]);
        }
        GrayBitmap::new(bbox.width() as usize, bbox.height() as usize, out)
    }

    /// Copies `src` into this bitmap with its top-left corner at `(x, y)`.
    pub fn blit(&mut self, src: &GrayBitmap, x: usize, y: usize) -> Result<BoundingBox, BitmapError> {
        let rect = BoundingBox::new(
            x as u32,
            y as u32,
            (x + src.width) as u32,
            (y + src.height) as u32,
        )?;
        rect.check_within(self.width, self.height)?;
        for row in 0..src.height {
            let dst = (y + row) * self.width + x;
            self.pixels[dst..dst + src.width]
                .copy_from_slice(&src.pixels[row * src.width..(row + 1) * src.width]);
        }
        Ok(rect)
    }
}

/// Axis-aligned pixel box, inclusive min / exclusive max.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BoundingBox {
    pub xmin: u32,
    pub ymin: u32,
    pub xmax: u32,
    pub ymax: u32,
}

impl BoundingBox {
    pub fn new(xmin: u32, ymin: u32, xmax: u32, ymax: u32) -> Result<Self, BitmapError> {
        if xmin >= xmax || ymin >= ymax {
            return Err(BitmapError::DegenerateBox {
                xmin,
                ymin,
                xmax,
                ymax,
            });
        }
        Ok(Self {
            xmin,
            ymin,
            xmax,
            ymax,
        })
    }

    pub fn width(&self) -> u32 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> u32 {
        self.ymax - self.ymin
    }

    pub fn area(&self) -> u64 {
        self.width() as u64 * self.height() as u64
    }

    pub fn check_within(&self, width: usize, height: usize) -> Result<(), BitmapError> {
        if self.xmin >= self.xmax || self.ymin >= self.ymax {
            return Err(BitmapError::DegenerateBox {
                xmin: self.xmin,
                ymin: self.ymin,
                xmax: self.xmax,
                ymax: self.ymax,
            });
        }
        if self.xmax as usize > width || self.ymax as usize > height {
            return Err(BitmapError::OutOfBounds {
                xmin: self.xmin,
                ymin: self.ymin,
                xmax: self.xmax,
                ymax: self.ymax,
                width,
                height,
            });
        }
        Ok(())
    }

    pub fn intersection_area(&self, other: &BoundingBox) -> u64 {
        let w = self.xmax.min(other.xmax).saturating_sub(self.xmin.max(other.xmin));
        let h = self.ymax.min(other.ymax).saturating_sub(self.ymin.max(other.ymin));
        w as u64 * h as u64
    }

    /// Smallest box covering both.
    pub fn union(&self, other: &BoundingBox) -> BoundingBox {
        BoundingBox {
            xmin: self.xmin.min(other.xmin),
            ymin: self.ymin.min(other.ymin),
            xmax: self.xmax.max(other.xmax),
            ymax: self.ymax.max(other.ymax),
        }
    }

    /// Shifts the box by `(dx, dy)`, e.g. to map crop coordinates back to the scene.
    pub fn translate(&self, dx: u32, dy: u32) -> BoundingBox {
        BoundingBox {
            xmin: self.xmin + dx,
            ymin: self.ymin + dy,
            xmax: self.xmax + dx,
            ymax: self.ymax + dy,
        }
    }
}

impl std::fmt::Display for BoundingBox {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{},{},{}", self.xmin, self.ymin, self.xmax, self.ymax)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_buffers() {
        assert!(matches!(
            GrayBitmap::new(0, 3, vec![]),
            Err(BitmapError::EmptyDimensions { .. })
        ));
        assert_eq!(
            GrayBitmap::new(2, 2, vec![0; 3]),
            Err(BitmapError::BufferSize {
                expected: 4,
                actual: 3
            })
        );
    }

    #[test]
    fn crop_and_blit_are_inverse() {
        let src = GrayBitmap::new(3, 2, vec![1, 2, 3, 4, 5, 6]).unwrap();
        let mut canvas = GrayBitmap::filled(10, 10, 128).unwrap();
        let rect = canvas.blit(&src, 4, 7).unwrap();
        assert_eq!(rect, BoundingBox::new(4, 7, 7, 9).unwrap());
        assert_eq!(canvas.crop(&rect).unwrap(), src);
        assert!(canvas.blit(&src, 8, 0).is_err());
    }

    #[test]
    fn box_geometry() {
        let a = BoundingBox::new(0, 0, 10, 10).unwrap();
        let b = BoundingBox::new(5, 0, 15, 10).unwrap();
        assert_eq!(a.intersection_area(&b), 50);
        assert_eq!(a.union(&b), BoundingBox::new(0, 0, 15, 10).unwrap());
        assert!(BoundingBox::new(3, 0, 3, 4).is_err());
    }
}
