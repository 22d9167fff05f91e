//! The shipped signature files are the printed builtins, and they check.

use std::path::PathBuf;

use bindsem_core::signature::{builtin, parse_signature, print_signature, validate};

const CORPUS: &[&str] = &["lc", "lc_fix", "monoid", "lj", "ll", "lc_ex", "cbv_small", "cbv_big", "pi"];

fn path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(format!("{name}.sig"))
}

#[test]
fn corpus_files_are_the_printed_builtins() {
    let bless = std::env::var_os("BINDSEM_BLESS").is_some();
    for name in CORPUS {
        let printed = print_signature(&builtin(name).unwrap());
        if bless {
            std::fs::write(path(name), &printed).unwrap();
        }
        let on_disk = std::fs::read_to_string(path(name)).unwrap_or_else(|e| panic!("{name}.sig: {e}"));
        assert_eq!(on_disk, printed, "{name}.sig is stale; rerun with BINDSEM_BLESS=1");
    }
}

#[test]
fn corpus_files_parse_back_and_validate() {
    for name in CORPUS {
        let text = std::fs::read_to_string(path(name)).unwrap();
        let doc = parse_signature(&text).unwrap();
        assert_eq!(print_signature(&doc), text, "{name}");
        assert!(validate(&doc).accepted(), "{name}");
    }
}
