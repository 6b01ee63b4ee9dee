//! On-disk cache of decoder lookup tables, keyed by distance and format
//! version.

use std::path::{Path, PathBuf};

use crate::decoder::{build_lookup_table, LookupTable, TABLE_FORMAT_VERSION};
use crate::error::Result;
use crate::lattice::ColorCode;

pub const CACHE_ENV: &str = "CHROMA_CACHE_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    /// No usable file; the table was built and stored.
    Built,
    /// A file existed but failed its header or checksum; rebuilt.
    Rebuilt,
    /// No cache directory configured.
    Disabled,
}

pub struct TableCache {
    dir: Option<PathBuf>,
}

impl TableCache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        TableCache { dir }
    }

    pub fn path_for(dir: &Path, distance: usize) -> PathBuf {
        dir.join(format!("lookup-d{distance}-v{TABLE_FORMAT_VERSION}.bin"))
    }

    pub fn load_or_build(&self, code: &ColorCode) -> Result<(LookupTable, CacheStatus)> {
        let Some(dir) = &self.dir else {
            return Ok((build_lookup_table(code)?, CacheStatus::Disabled));
        };
        let path = Self::path_for(dir, code.distance);
        let mut status = CacheStatus::Built;
        if let Ok(bytes) = std::fs::read(&path) {
            match LookupTable::from_bytes(&bytes) {
                Ok(t) if t.distance == code.distance && t.n == code.n() && t.m == code.m() => {
                    return Ok((t, CacheStatus::Hit));
                }
                _ => status = CacheStatus::Rebuilt,
            }
        }
        let table = build_lookup_table(code)?;
        std::fs::create_dir_all(dir)?;
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        std::fs::write(&tmp, table.to_bytes())?;
        std::fs::rename(&tmp, &path)?;
        Ok((table, status))
    }
}
