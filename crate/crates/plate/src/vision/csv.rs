use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use super::{PlateReading, VisionError};

pub const CSV_HEADER: &str = "image_id,plate_text,confidence\n";

/// `image_id,filtered_text,score` with the score to four decimals.
pub fn csv_row(reading: &PlateReading) -> String {
    format!(
        "{},{},{:.4}\n",
        reading.image_id, reading.filtered_text, reading.mean_char_score
    )
}

/// Appends one record, writing the header first when the file is new or
/// empty. The record goes out in a single write followed by a flush; callers
/// serialize appends to the same path.
pub fn append_csv(reading: &PlateReading, path: &Path) -> Result<(), VisionError> {
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut record = String::new();
    if file.metadata()?.len() == 0 {
        record.push_str(CSV_HEADER);
    }
    record.push_str(&csv_row(reading));
    file.write_all(record.as_bytes())?;
    file.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitmap::BoundingBox;
    use crate::vision::DetectionResult;

    fn reading(id: &str, text: &str, score: f64) -> PlateReading {
        PlateReading {
            image_id: id.into(),
            raw_text: text.into(),
            filtered_text: text.into(),
            mean_char_score: score,
            detection: DetectionResult {
                bbox: BoundingBox::new(0, 0, 1, 1).unwrap(),
                score: 1.0,
            },
        }
    }

    #[test]
    fn row_format() {
        assert_eq!(csv_row(&reading("img_007", "4821", 0.97)), "img_007,4821,0.9700\n");
        assert_eq!(csv_row(&reading("a", "", 1.0)), "a,,1.0000\n");
    }

    #[test]
    fn header_once_then_rows_in_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        append_csv(&reading("img_007", "4821", 0.97), &path).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            "image_id,plate_text,confidence\nimg_007,4821,0.9700\n"
        );
        append_csv(&reading("img_008", "55", 0.5), &path).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            "image_id,plate_text,confidence\nimg_007,4821,0.9700\nimg_008,55,0.5000\n"
        );
    }
}
