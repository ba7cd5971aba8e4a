//! Binary checkpoint of an agent's networks and optimizer state.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! "RWCTL1"                     6 bytes
//! config hash                  32 bytes (SHA-256 of the agent section)
//! critic updates, actor updates   u64, u64
//! network count                u32
//!   per network: hidden act u8, output act u8, layer-size count u32,
//!                sizes u32..., param count u64, params f64...
//! optimizer count              u32
//!   per optimizer: step u64, lr beta1 beta2 epsilon f64 x4,
//!                  moment count u64, m f64..., v f64...
//! ```

use std::io::{Read, Write};
use std::path::Path;

use super::config::config_hash;
use crate::agent::Td3Agent;
use crate::error::CheckpointError;
use crate::nn::{Activation, DenseNet, OptimizerState};

pub const MAGIC: &[u8; 6] = b"RWCTL1";

pub fn write_checkpoint<W: Write>(mut w: W, agent: &Td3Agent) -> Result<(), CheckpointError> {
    w.write_all(MAGIC)?;
    w.write_all(&config_hash(&agent.config))?;
    w.write_all(&agent.critic_updates().to_le_bytes())?;
    w.write_all(&agent.actor_updates().to_le_bytes())?;
    let nets = agent.nets.nets();
    w.write_all(&(nets.len() as u32).to_le_bytes())?;
    for net in nets {
        w.write_all(&[net.hidden.code(), net.output.code()])?;
        let sizes = net.sizes();
        w.write_all(&(sizes.len() as u32).to_le_bytes())?;
        for s in sizes {
            w.write_all(&(s as u32).to_le_bytes())?;
        }
        write_f64s(&mut w, &net.flat_params())?;
    }
    let opts = [&agent.actor_opt, &agent.critic1_opt, &agent.critic2_opt];
    w.write_all(&(opts.len() as u32).to_le_bytes())?;
    for o in opts {
        w.write_all(&o.step.to_le_bytes())?;
        for x in [o.config.learning_rate, o.config.beta1, o.config.beta2, o.config.epsilon] {
            w.write_all(&x.to_le_bytes())?;
        }
        let (m, v) = o.flat_moments();
        write_f64s(&mut w, &m)?;
        for x in &v {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Loads a checkpoint into `agent`, which must have been built from the
/// same agent configuration. On error `agent` is left unchanged.
pub fn read_checkpoint<R: Read>(mut r: R, agent: &mut Td3Agent) -> Result<(), CheckpointError> {
    let mut magic = [0u8; 6];
    read_exact(&mut r, &mut magic)?;
    if &magic != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let mut hash = [0u8; 32];
    read_exact(&mut r, &mut hash)?;
    if hash != config_hash(&agent.config) {
        return Err(CheckpointError::ConfigMismatch);
    }
    let critic_updates = read_u64(&mut r)?;
    let actor_updates = read_u64(&mut r)?;

    let mut staged = agent.nets.clone();
    let n_nets = read_u32(&mut r)? as usize;
    if n_nets != 6 {
        return Err(CheckpointError::Layout(format!("expected 6 networks, found {n_nets}")));
    }
    for (i, net) in staged.nets_mut().into_iter().enumerate() {
        read_net(&mut r, net).map_err(|e| match e {
            CheckpointError::Layout(m) => CheckpointError::Layout(format!("network {i}: {m}")),
            other => other,
        })?;
    }
    let n_opts = read_u32(&mut r)? as usize;
    if n_opts != 3 {
        return Err(CheckpointError::Layout(format!("expected 3 optimizers, found {n_opts}")));
    }
    let mut opts = [agent.actor_opt.clone(), agent.critic1_opt.clone(), agent.critic2_opt.clone()];
    for o in opts.iter_mut() {
        read_optimizer(&mut r, o)?;
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(CheckpointError::Layout("trailing bytes".into()));
    }
    let [a, c1, c2] = opts;
    agent.nets = staged;
    agent.actor_opt = a;
    agent.critic1_opt = c1;
    agent.critic2_opt = c2;
    agent.set_update_counts(critic_updates, actor_updates);
    Ok(())
}

pub fn save(path: &Path, agent: &Td3Agent) -> Result<(), CheckpointError> {
    let mut buf = Vec::new();
    write_checkpoint(&mut buf, agent)?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn load(path: &Path, agent: &mut Td3Agent) -> Result<(), CheckpointError> {
    let bytes = std::fs::read(path)?;
    read_checkpoint(bytes.as_slice(), agent)
}

fn read_net<R: Read>(r: &mut R, net: &mut DenseNet) -> Result<(), CheckpointError> {
    let mut acts = [0u8; 2];
    read_exact(r, &mut acts)?;
    let hidden = Activation::from_code(acts[0]).ok_or_else(|| CheckpointError::Layout("bad activation".into()))?;
    let output = Activation::from_code(acts[1]).ok_or_else(|| CheckpointError::Layout("bad activation".into()))?;
    if hidden != net.hidden || output != net.output {
        return Err(CheckpointError::Layout("activation mismatch".into()));
    }
    let n = read_u32(r)? as usize;
    if n > 64 {
        return Err(CheckpointError::Layout(format!("{n} layer sizes")));
    }
    let sizes = (0..n).map(|_| read_u32(r).map(|s| s as usize)).collect::<Result<Vec<_>, _>>()?;
    if sizes != net.sizes() {
        return Err(CheckpointError::Layout(format!("sizes {sizes:?}, expected {:?}", net.sizes())));
    }
    let params = read_f64s(r, net.param_count())?;
    net.set_flat_params(&params)
        .map_err(|e| CheckpointError::Layout(e.to_string()))
}

fn read_optimizer<R: Read>(r: &mut R, o: &mut OptimizerState) -> Result<(), CheckpointError> {
    o.step = read_u64(r)?;
    o.config.learning_rate = read_f64(r)?;
    o.config.beta1 = read_f64(r)?;
    o.config.beta2 = read_f64(r)?;
    o.config.epsilon = read_f64(r)?;
    let expected = o.flat_moments().0.len();
    let m = read_f64s(r, expected)?;
    let mut v = vec![0.0; expected];
    for x in v.iter_mut() {
        *x = read_f64(r)?;
    }
    o.set_flat_moments(&m, &v)
        .map_err(|e| CheckpointError::Layout(e.to_string()))
}

fn write_f64s<W: Write>(w: &mut W, xs: &[f64]) -> Result<(), CheckpointError> {
    w.write_all(&(xs.len() as u64).to_le_bytes())?;
    for x in xs {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

fn read_f64s<R: Read>(r: &mut R, expected: usize) -> Result<Vec<f64>, CheckpointError> {
    let n = read_u64(r)? as usize;
    if n != expected {
        return Err(CheckpointError::Layout(format!("{n} values, expected {expected}")));
    }
    (0..n).map(|_| read_f64(r)).collect()
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<(), CheckpointError> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => CheckpointError::Truncated,
        _ => CheckpointError::Io(e),
    })
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, CheckpointError> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64, CheckpointError> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64, CheckpointError> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(f64::from_le_bytes(b))
}
