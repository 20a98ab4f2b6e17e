use super::*;
use proptest::prelude::*;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use testgen_core::corpus::{load_manifest, load_templates};
use testgen_core::coverage::{instrumented_build_and_run, parse_annotated, synthesize, CoverageError, CoverageReport};
use testgen_core::harness::HarnessConfig;

#[derive(Deserialize)]
pub struct Expected {
    pub source: String,
    pub lines_total: u64,
    pub lines_executed: u64,
    pub branches_total: u64,
    pub branches_executed: u64,
    pub line_pct: f64,
    pub branch_pct: f64,
}

#[derive(Debug, Clone)]
pub enum Rec {
    Blank,
    Count { n: u64, star: bool, branches: Vec<Option<u64>> },
    Unexecuted { exceptional: bool, branches: Vec<Option<u64>> },
    Noise(u8),
}

pub fn rec() -> impl Strategy<Value = Rec> {
    let branches = prop::collection::vec(prop::option::of(0u64..5), 0..4);
    prop_oneof![
        Just(Rec::Blank),
        (1u64..1000, any::<bool>(), branches.clone()).prop_map(|(n, star, branches)| Rec::Count { n, star, branches }),
        (any::<bool>(), branches).prop_map(|(exceptional, branches)| Rec::Unexecuted { exceptional, branches }),
        (0u8..4).prop_map(Rec::Noise),
    ]
}

/// Renders the records and counts them independently of the parser.
pub fn render(recs: &[Rec]) -> (String, [u64; 4]) {
    let mut s = String::from("        -:    0:Source:src/gen.cpp\n        -:    0:Runs:1\n");
    let mut c = [0u64; 4];
    let mut line = 0;
    for r in recs {
        let branches = match r {
            Rec::Blank => {
                line += 1;
                s += &format!("        -:{line:>5}:\n");
                continue;
            }
            Rec::Noise(k) => {
                s += match k {
                    0 => "function _Z1fv called 1 returned 100% blocks executed 100%\n",
                    1 => "call    0 returned 1\n",
                    2 => "unconditional  0 taken 1\n",
                    _ => "\n",
                };
                continue;
            }
            Rec::Count { n, star, branches } => {
                line += 1;
                c[0] += 1;
                c[1] += 1;
                s += &format!("{:>9}:{line:>5}:  x += {n};\n", format!("{n}{}", if *star { "*" } else { "" }));
                branches
            }
            Rec::Unexecuted { exceptional, branches } => {
                line += 1;
                c[0] += 1;
                s += &format!("{:>9}:{line:>5}:  y();\n", if *exceptional { "=====" } else { "#####" });
                branches
            }
        };
        for (i, b) in branches.iter().enumerate() {
            c[2] += 1;
            match b {
                Some(t) => {
                    c[3] += u64::from(*t > 0);
                    s += &format!("branch {i:>2} taken {t}\n");
                }
                None => s += &format!("branch {i:>2} never executed\n"),
            }
        }
    }
    (s, c)
}
