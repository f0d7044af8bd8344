//! The PASCAL VOC subset used for plate annotations: one `<object>` named
//! `licence` with an integer `<bndbox>`.

use std::fmt::Write as _;

use thiserror::Error;

use super::AnnotatedScene;
use crate::bitmap::BoundingBox;

pub const OBJECT_NAME: &str = "licence";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VocError {
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("missing field <{0}>")]
    MissingField(&'static str),
    #[error("<{field}> is not an integer: {value:?}")]
    NonIntegerCoordinate { field: &'static str, value: String },
    #[error("degenerate box ({xmin},{ymin},{xmax},{ymax})")]
    DegenerateBox {
        xmin: i64,
        ymin: i64,
        xmax: i64,
        ymax: i64,
    },
    #[error("box {bbox} lies outside the {width}x{height} image")]
    OutOfBounds {
        bbox: BoundingBox,
        width: u32,
        height: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VocAnnotation {
    /// `<filename>` without its extension.
    pub image_id: String,
    pub filename: String,
    pub width: u32,
    pub height: u32,
    pub bbox: BoundingBox,
}

pub fn emit_voc_xml(scene: &AnnotatedScene) -> String {
    let b = &scene.truth;
    let mut out = String::new();
    // infallible: writing into a String
    let _ = write!(
        out,
        "<annotation>\n\
         \t<folder>images</folder>\n\
         \t<filename>{id}.pgm</filename>\n\
         \t<size>\n\
         \t\t<width>{w}</width>\n\
         \t\t<height>{h}</height>\n\
         \t\t<depth>1</depth>\n\
         \t</size>\n\
         \t<segmented>0</segmented>\n\
         \t<object>\n\
         \t\t<name>{OBJECT_NAME}</name>\n\
         \t\t<pose>Unspecified</pose>\n\
         \t\t<truncated>0</truncated>\n\
         \t\t<occluded>0</occluded>\n\
         \t\t<difficult>0</difficult>\n\
         \t\t<bndbox>\n\
         \t\t\t<xmin>{xmin}</xmin>\n\
         \t\t\t<ymin>{ymin}</ymin>\n\
         \t\t\t<xmax>{xmax}</xmax>\n\
         \t\t\t<ymax>{ymax}</ymax>\n\
         \t\t</bndbox>\n\
         \t</object>\n\
         </annotation>\n",
        id = xml_escape(&scene.image_id),
        w = scene.image.width(),
        h = scene.image.height(),
        xmin = b.xmin,
        ymin = b.ymin,
        xmax = b.xmax,
        ymax = b.ymax,
    );
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn child<'a, 'input>(
    node: roxmltree::Node<'a, 'input>,
    name: &str,
) -> Option<roxmltree::Node<'a, 'input>> {
    node.children().find(|c| c.has_tag_name(name))
}

fn text_of<'a>(node: roxmltree::Node<'a, '_>, name: &'static str) -> Result<&'a str, VocError> {
    child(node, name)
        .and_then(|n| n.text())
        .map(str::trim)
        .ok_or(VocError::MissingField(name))
}

fn integer(node: roxmltree::Node<'_, '_>, name: &'static str) -> Result<i64, VocError> {
    let raw = text_of(node, name)?;
    raw.parse::<i64>().map_err(|_| VocError::NonIntegerCoordinate {
        field: name,
        value: raw.to_string(),
    })
}

/// Parses the annotation; the first `licence` object supplies the box.
pub fn parse_voc_xml(xml: &str) -> Result<VocAnnotation, VocError> {
    let doc = roxmltree::Document::parse(xml).map_err(|e| VocError::MalformedXml(e.to_string()))?;
    let root = doc.root_element();
    if !root.has_tag_name("annotation") {
        return Err(VocError::MissingField("annotation"));
    }
    let filename = text_of(root, "filename")?.to_string();
    let image_id = match filename.rsplit_once('.') {
        Some((stem, _)) if !stem.is_empty() => stem.to_string(),
        _ => filename.clone(),
    };
    let size = child(root, "size").ok_or(VocError::MissingField("size"))?;
    let width = integer(size, "width")?;
    let height = integer(size, "height")?;

    let object = root
        .children()
        .filter(|c| c.has_tag_name("object"))
        .find(|o| text_of(*o, "name").is_ok_and(|n| n == OBJECT_NAME))
        .ok_or(VocError::MissingField("object"))?;
    let bndbox = child(object, "bndbox").ok_or(VocError::MissingField("bndbox"))?;
    let xmin = integer(bndbox, "xmin")?;
    let ymin = integer(bndbox, "ymin")?;
    let xmax = integer(bndbox, "xmax")?;
    let ymax = integer(bndbox, "ymax")?;
    if xmin < 0 || ymin < 0 || xmin >= xmax || ymin >= ymax || xmax > u32::MAX as i64 || ymax > u32::MAX as i64 {
        return Err(VocError::DegenerateBox { xmin, ymin, xmax, ymax });
    }
    let bbox = BoundingBox {
        xmin: xmin as u32,
        ymin: ymin as u32,
        xmax: xmax as u32,
        ymax: ymax as u32,
    };
    let (width, height) = (
        u32::try_from(width).map_err(|_| VocError::NonIntegerCoordinate {
            field: "width",
            value: width.to_string(),
        })?,
        u32::try_from(height).map_err(|_| VocError::NonIntegerCoordinate {
            field: "height",
            value: height.to_string(),
        })?,
    );
    if bbox.xmax > width || bbox.ymax > height {
        return Err(VocError::OutOfBounds { bbox, width, height });
    }
    Ok(VocAnnotation {
        image_id,
        filename,
        width,
        height,
        bbox,
    })
}
