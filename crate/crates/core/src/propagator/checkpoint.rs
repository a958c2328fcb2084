//! Plain-text checkpoints of radial fields.
//!
//! Layout: `# key=value` header lines (`mu`, `time`, `nodes`, `potential`),
//! then CSV with columns `r,re,im`. Values use the shortest round-trip
//! representation, so a write/read cycle is lossless.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::RadialField;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::potential::PotentialSpec;

#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub field: RadialField,
    /// Fingerprint of the potential the field was evolved with.
    pub potential: Option<String>,
}

impl Checkpoint {
    pub fn new(field: RadialField, spec: Option<&PotentialSpec>) -> Self {
        Self {
            field,
            potential: spec.map(PotentialSpec::fingerprint),
        }
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        let f = &self.field;
        writeln!(out, "# mu={:e}", f.mu())?;
        writeln!(out, "# time={:e}", f.time())?;
        writeln!(out, "# nodes={}", f.grid().len())?;
        writeln!(out, "# potential={}", self.potential.as_deref().unwrap_or("none"))?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["r", "re", "im"])?;
        for (r, z) in f.grid().nodes().iter().zip(f.samples()) {
            w.write_record([format!("{r:e}"), format!("{:e}", z.re), format!("{:e}", z.im)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(input: R) -> Result<Self> {
        let mut reader = BufReader::new(input);
        let mut header = std::collections::BTreeMap::new();
        let mut body = String::new();
        let mut line = String::new();
        loop {
            line.clear();
            if reader.read_line(&mut line)? == 0 {
                break;
            }
            match line.strip_prefix('#') {
                Some(rest) => {
                    let (k, v) = rest
                        .trim()
                        .split_once('=')
                        .ok_or_else(|| Error::Config(format!("bad checkpoint header line {:?}", line.trim())))?;
                    header.insert(k.trim().to_string(), v.trim().to_string());
                }
                None => {
                    body.push_str(&line);
                    reader.read_to_string(&mut body)?;
                    break;
                }
            }
        }
        let get = |k: &str| {
            header
                .get(k)
                .ok_or_else(|| Error::Config(format!("checkpoint header lacks {k}")))
        };
        let parse = |k: &str| -> Result<f64> {
            get(k)?
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("checkpoint {k}: {e}")))
        };
        let mu = parse("mu")?;
        let time = parse("time")?;
        let nodes: usize = get("nodes")?
            .parse()
            .map_err(|e| Error::Config(format!("checkpoint nodes: {e}")))?;
        let potential = match get("potential")?.as_str() {
            "none" => None,
            s => Some(s.to_string()),
        };
        let mut r = Vec::with_capacity(nodes);
        let mut samples = Vec::with_capacity(nodes);
        for rec in csv::Reader::from_reader(body.as_bytes()).deserialize::<(f64, f64, f64)>() {
            let (x, re, im) = rec?;
            r.push(x);
            samples.push(Complex64::new(re, im));
        }
        if r.len() != nodes {
            return Err(Error::Config(format!("checkpoint declares {nodes} nodes, holds {}", r.len())));
        }
        let mut field = RadialField::new(RadialGrid::from_nodes(r)?, samples, mu)?;
        field.time = time;
        Ok(Self { field, potential })
    }

    /// Errors unless the checkpoint was written for `spec`.
    pub fn ensure_potential(&self, spec: &PotentialSpec) -> Result<()> {
        match &self.potential {
            Some(h) if *h == spec.fingerprint() => Ok(()),
            other => Err(Error::validation(
                "checkpoint",
                format!("potential {other:?} does not match {}", spec.fingerprint()),
            )),
        }
    }
}

pub fn write_checkpoint(path: impl AsRef<Path>, checkpoint: &Checkpoint) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    checkpoint.write_to(&mut out)?;
    out.flush()?;
    Ok(())
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    Checkpoint::read_from(File::open(path)?)
}
