//! Fuzzes the baseline-document JSON decoder. Any input must parse or
//! fail cleanly, and every successfully parsed document with finite
//! entries must survive a serialize → parse round trip unchanged.

#![no_main]

use dpwave::report::BaselineDoc;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    let Ok(doc) = BaselineDoc::from_json(&text) else {
        return;
    };
    let finite = doc
        .values
        .values()
        .chain(doc.tolerances.values())
        .all(|v| v.is_finite());
    if finite {
        let round = BaselineDoc::from_json(&doc.to_json()).expect("re-parse of own output");
        assert_eq!(round.values, doc.values);
        assert_eq!(round.tolerances, doc.tolerances);
    }
});
