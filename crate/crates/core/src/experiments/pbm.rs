//! Plain (P1) PBM images. A `1` pixel is foreground.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::submodular::{check_dim, BinaryVector};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    pub height: usize,
    pub width: usize,
    /// Row-major.
    pub pixels: BinaryVector,
}

impl BinaryImage {
    pub fn new(height: usize, width: usize, pixels: BinaryVector) -> Result<Self> {
        check_dim(height * width, pixels.len())?;
        Ok(BinaryImage {
            height,
            width,
            pixels,
        })
    }

    pub fn to_pbm(&self) -> String {
        let mut out = format!("P1\n{} {}\n", self.width, self.height);
        for row in self.pixels.bits().chunks(self.width.max(1)) {
            let line: Vec<&str> = row.iter().map(|&b| if b { "1" } else { "0" }).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn from_pbm(text: &str) -> Result<Self> {
        // strip comments, then tokenize; raster digits may be unseparated
        let mut cleaned = String::with_capacity(text.len());
        for line in text.lines() {
            let body = line.split('#').next().unwrap_or("");
            cleaned.push_str(body);
            cleaned.push('\n');
        }
        let mut tokens = cleaned.split_whitespace();
        match tokens.next() {
            Some("P1") => {}
            _ => return Err(Error::parse(1, "not a plain PBM (missing P1 magic)")),
        }
        let mut dim = |name: &str| -> Result<usize> {
            tokens
                .next()
                .ok_or_else(|| Error::parse(1, format!("missing {name}")))?
                .parse()
                .map_err(|_| Error::parse(1, format!("bad {name}")))
        };
        let width = dim("width")?;
        let height = dim("height")?;
        let mut bits = Vec::with_capacity(width * height);
        for tok in tokens {
            for ch in tok.chars() {
                match ch {
                    '0' => bits.push(false),
                    '1' => bits.push(true),
                    other => return Err(Error::parse(0, format!("bad pixel `{other}`"))),
                }
            }
        }
        if bits.len() != width * height {
            return Err(Error::parse(
                0,
                format!("expected {} pixels, found {}", width * height, bits.len()),
            ));
        }
        BinaryImage::new(height, width, BinaryVector::new(bits))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_pbm())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        BinaryImage::from_pbm(&std::fs::read_to_string(path)?)
    }
}

/// All `*.pbm` files in `dir`, sorted by file name; every image must have
/// the same size.
pub fn load_pbm_dir(dir: &Path) -> Result<Vec<BinaryImage>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("pbm")))
        .collect();
    paths.sort();
    let images = paths
        .iter()
        .map(|p| BinaryImage::load(p))
        .collect::<Result<Vec<_>>>()?;
    if let Some(first) = images.first() {
        if let Some(bad) = images
            .iter()
            .find(|im| (im.height, im.width) != (first.height, first.width))
        {
            return Err(Error::Config(format!(
                "mixed image sizes {}x{} and {}x{}",
                first.height, first.width, bad.height, bad.width
            )));
        }
    }
    Ok(images)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let img = BinaryImage::new(2, 3, BinaryVector::from_u8(&[1, 0, 1, 0, 0, 1]).unwrap())
            .unwrap();
        let text = img.to_pbm();
        assert_eq!(text, "P1\n3 2\n1 0 1\n0 0 1\n");
        assert_eq!(BinaryImage::from_pbm(&text).unwrap(), img);
    }

    #[test]
    fn accepts_comments_and_packed_rasters() {
        let img = BinaryImage::from_pbm("P1\n# a comment\n3 2\n101\n001 # trailing\n").unwrap();
        assert_eq!(img.pixels.to_mask(), 0b100101);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(BinaryImage::from_pbm("P4\n1 1\n0\n").is_err());
        assert!(BinaryImage::from_pbm("P1\n2 2\n0 1 1\n").is_err());
        assert!(BinaryImage::from_pbm("P1\n1 1\n2\n").is_err());
        assert!(BinaryImage::from_pbm("P1\nx 1\n0\n").is_err());
    }

    #[test]
    fn directory_loading() {
        let dir = tempfile::tempdir().unwrap();
        let a = BinaryImage::new(1, 2, BinaryVector::from_u8(&[1, 0]).unwrap()).unwrap();
        let b = BinaryImage::new(1, 2, BinaryVector::from_u8(&[0, 1]).unwrap()).unwrap();
        b.save(&dir.path().join("b.pbm")).unwrap();
        a.save(&dir.path().join("a.pbm")).unwrap();
        std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        assert_eq!(load_pbm_dir(dir.path()).unwrap(), vec![a.clone(), b]);
        let c = BinaryImage::new(2, 1, BinaryVector::from_u8(&[0, 1]).unwrap()).unwrap();
        c.save(&dir.path().join("c.pbm")).unwrap();
        assert!(load_pbm_dir(dir.path()).is_err());
    }
}
