//! CSV and text artifacts with a provenance header.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use neutral_core::C64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Header lines shared by every artifact of one run: tool version, seed and the config echo.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Header {
    pub lines: Vec<String>,
}

impl Header {
    pub fn new(seed: u64, config: &str) -> Self {
        Self { lines: vec![format!("neutral {VERSION}"), format!("seed {seed}"), format!("config {config}")] }
    }

    fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for l in &self.lines {
            writeln!(w, "# {l}")?;
        }
        Ok(())
    }
}

pub struct ArtifactDir {
    dir: PathBuf,
    header: Header,
}

impl ArtifactDir {
    pub fn create(dir: &Path, header: Header) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), header })
    }

    pub fn csv<R: AsRef<[String]>>(&self, name: &str, columns: &[&str], rows: &[R]) -> io::Result<PathBuf> {
        let path = self.dir.join(name);
        let mut file = BufWriter::new(File::create(&path)?);
        self.header.write_to(&mut file)?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(columns)?;
        for r in rows {
            w.write_record(r.as_ref())?;
        }
        w.flush()?;
        Ok(path)
    }

    pub fn text(&self, name: &str, body: &str) -> io::Result<PathBuf> {
        let path = self.dir.join(name);
        let mut file = BufWriter::new(File::create(&path)?);
        self.header.write_to(&mut file)?;
        file.write_all(body.as_bytes())?;
        file.flush()?;
        Ok(path)
    }
}

/// Fixed-format float so that artifacts compare byte for byte.
pub fn num(x: f64) -> String {
    format!("{x:.12e}")
}

pub fn cnum(z: C64) -> [String; 2] {
    [num(z.re), num(z.im)]
}
