use tollgate_plate::corpus::parse_voc_xml;
use tollgate_plate::BoundingBox;

#[test]
fn kaggle_style_annotation_parses() {
    let xml = include_str!("fixtures/Cars0.xml");
    let ann = parse_voc_xml(xml).unwrap();
    assert_eq!(ann.image_id, "Cars0");
    assert_eq!(ann.filename, "Cars0.png");
    assert_eq!((ann.width, ann.height), (500, 268));
    assert_eq!(ann.bbox, BoundingBox::new(226, 125, 419, 173).unwrap());
}
