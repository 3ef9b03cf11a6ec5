//! The SuiteSparse matrices used as the SpMV reference set, with row counts
//! and nonzero counts after symmetric expansion.

use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReferenceMatrix {
    pub code: &'static str,
    pub name: &'static str,
    pub rows: u64,
    pub nnz: u64,
}

const fn m(code: &'static str, name: &'static str, rows: u64, nnz: u64) -> ReferenceMatrix {
    ReferenceMatrix {
        code,
        name,
        rows,
        nnz,
    }
}

/// Ordered by nonzero count.
pub const SPMV_REFERENCE_SET: [ReferenceMatrix; 21] = [
    m("D1", "dc2", 116_835, 766_396),
    m("D2", "scircuit", 170_998, 958_936),
    m("D3", "mac_econ_fwd500", 206_500, 1_273_389),
    m("D4", "conf5_4-8x8-10", 49_152, 1_916_928),
    m("D5", "mc2depi", 525_825, 2_100_225),
    m("D6", "rma10", 46_835, 2_374_001),
    m("D7", "cop20k_A", 121_192, 2_624_331),
    m("D8", "webbase-1M", 1_000_005, 3_105_536),
    m("D9", "ASIC_680k", 682_862, 3_871_773),
    m("D10", "cant", 62_451, 4_007_383),
    m("D11", "pdb1HYS", 36_417, 4_344_765),
    m("D12", "consph", 83_334, 6_010_480),
    m("D13", "shipsec1", 140_874, 7_813_404),
    m("D14", "mip1", 66_463, 10_352_819),
    m("D15", "pwtk", 217_918, 11_634_424),
    m("D16", "Si41Ge41H72", 185_639, 15_011_265),
    m("D17", "in-2004", 1_382_908, 16_917_053),
    m("D18", "Ga41As41H72", 268_096, 18_488_476),
    m("D19", "eu-2005", 862_664, 19_235_140),
    m("D20", "FullChip", 2_987_012, 26_621_990),
    m("D21", "circuit5M", 5_558_326, 59_524_291),
];

/// Looks a matrix up by code (`D21`) or name, ignoring case.
pub fn find(key: &str) -> Option<&'static ReferenceMatrix> {
    SPMV_REFERENCE_SET
        .iter()
        .find(|r| r.code.eq_ignore_ascii_case(key) || r.name.eq_ignore_ascii_case(key))
}

/// `dir/<name>.mtx` or the SuiteSparse archive layout `dir/<name>/<name>.mtx`,
/// whichever exists first.
pub fn locate(dir: &Path, matrix: &ReferenceMatrix) -> Option<PathBuf> {
    let file = format!("{}.mtx", matrix.name);
    [dir.join(&file), dir.join(matrix.name).join(&file)]
        .into_iter()
        .find(|p| p.is_file())
}
