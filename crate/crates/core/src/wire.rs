//! Off-sensor data schema: person-presence confidence carried in one byte,
//! plus an in-process simulated device and host for exercising it.
//!
//! The mapping is linear, `raw = round_half_up(p * 255)` and
//! `p = raw / 255`, so a round trip is off by at most `0.5 / 255`.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, AtomicU8, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Identifier the manifest's `communication.payload_schema` must carry.
pub const PAYLOAD_SCHEMA: &str = "confidence-byte/1";

/// Default 7-bit bus address of the simulated sensor.
pub const DEFAULT_ADDRESS: u8 = 0x62;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConfidenceByte(pub u8);

/// Worst-case absolute error of an encode/decode round trip.
pub fn quantization_bound<T: Scalar>() -> T {
    T::lit(0.5) / T::lit(255.0)
}

pub fn encode_confidence<T: Scalar>(p: T) -> Result<ConfidenceByte> {
    if !(p >= T::zero() && p <= T::one()) {
        return Err(Error::OutOfRange { what: "confidence", value: p.to_string(), range: "[0, 1]" });
    }
    let scaled = (p * T::lit(255.0) + T::lit(0.5)).floor();
    let raw = scaled.to_u8().unwrap_or(u8::MAX);
    Ok(ConfidenceByte(raw))
}

pub fn decode_confidence<T: Scalar>(b: ConfidenceByte) -> T {
    T::lit(f64::from(b.0)) / T::lit(255.0)
}

/// Simulated sensor exposing one read-only register with the latest byte.
///
/// One writer and any number of readers may share a device; both sides
/// touch a single atomic byte, so a reader only ever sees a complete value
/// that was written at some point.
#[derive(Debug)]
pub struct SimDevice {
    address: u8,
    latest: AtomicU8,
    read_count: AtomicU64,
}

impl SimDevice {
    pub fn new(address: u8, initial: ConfidenceByte) -> Result<Self> {
        if !(0x08..=0x77).contains(&address) {
            return Err(Error::OutOfRange {
                what: "bus address",
                value: format!("{address:#04x}"),
                range: "[0x08, 0x77]",
            });
        }
        Ok(SimDevice { address, latest: AtomicU8::new(initial.0), read_count: AtomicU64::new(0) })
    }

    pub fn address(&self) -> u8 {
        self.address
    }

    pub fn read_count(&self) -> u64 {
        self.read_count.load(Ordering::Acquire)
    }

    /// Returns the latched byte. Never blocks.
    pub fn read(&self) -> ConfidenceByte {
        self.read_count.fetch_add(1, Ordering::AcqRel);
        ConfidenceByte(self.latest.load(Ordering::Acquire))
    }

    /// Latches a new confidence. On a range error the register is untouched.
    pub fn update<T: Scalar>(&self, p: T) -> Result<()> {
        let byte = encode_confidence(p)?;
        self.latest.store(byte.0, Ordering::Release);
        Ok(())
    }
}

impl Default for SimDevice {
    fn default() -> Self {
        SimDevice::new(DEFAULT_ADDRESS, ConfidenceByte(0)).expect("default address is valid")
    }
}

pub fn device_read(dev: &SimDevice) -> ConfidenceByte {
    dev.read()
}

pub fn device_update<T: Scalar>(dev: &SimDevice, p: T) -> Result<()> {
    dev.update(p)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Transaction {
    Read { address: u8, len: usize },
    Write { address: u8, data: Vec<u8> },
}

/// Host side of an in-process loopback bus. Devices are addressed like on a
/// two-wire bus; unknown addresses NACK and writes are refused.
#[derive(Debug, Default)]
pub struct Loopback<'a> {
    devices: BTreeMap<u8, &'a SimDevice>,
}

impl<'a> Loopback<'a> {
    pub fn new() -> Self {
        Loopback { devices: BTreeMap::new() }
    }

    pub fn attach(&mut self, device: &'a SimDevice) {
        self.devices.insert(device.address(), device);
    }

    /// Executes one transaction; reads return one byte per requested byte,
    /// each a fresh register read.
    pub fn transact(&self, tx: &Transaction) -> Result<Vec<u8>> {
        match tx {
            Transaction::Read { address, len } => {
                let dev = self.devices.get(address).ok_or(Error::Nack { address: *address })?;
                Ok((0..*len).map(|_| dev.read().0).collect())
            }
            Transaction::Write { address, .. } => {
                if self.devices.contains_key(address) {
                    Err(Error::ReadOnly { address: *address })
                } else {
                    Err(Error::Nack { address: *address })
                }
            }
        }
    }

    /// Reads the confidence byte of the device at `address` and decodes it.
    pub fn read_confidence<T: Scalar>(&self, address: u8) -> Result<T> {
        let bytes = self.transact(&Transaction::Read { address, len: 1 })?;
        Ok(decode_confidence(ConfidenceByte(bytes[0])))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::sync::Arc;

    #[test]
    fn encode_examples() {
        assert_eq!(encode_confidence(0.0f64).unwrap(), ConfidenceByte(0));
        assert_eq!(encode_confidence(1.0f64).unwrap(), ConfidenceByte(255));
        assert_eq!(encode_confidence(0.52f64).unwrap(), ConfidenceByte(133));
        assert_eq!(encode_confidence(0.5f64).unwrap(), ConfidenceByte(128));
        assert_eq!(encode_confidence(0.52f32).unwrap(), ConfidenceByte(133));
        assert!(encode_confidence(-0.01f64).is_err());
        assert!(encode_confidence(1.01f64).is_err());
        assert!(encode_confidence(f64::NAN).is_err());
    }

    #[test]
    fn decode_examples() {
        assert_eq!(decode_confidence::<f64>(ConfidenceByte(255)), 1.0);
        assert_eq!(decode_confidence::<f64>(ConfidenceByte(0)), 0.0);
        assert!((decode_confidence::<f64>(ConfidenceByte(133)) - 0.521_568_627_450_980_4).abs() < 1e-15);
    }

    #[test]
    fn device_examples() {
        let dev = SimDevice::new(DEFAULT_ADDRESS, ConfidenceByte(200)).unwrap();
        assert_eq!(device_read(&dev), ConfidenceByte(200));
        assert_eq!(device_read(&dev), ConfidenceByte(200));
        assert_eq!(dev.read_count(), 2);
        device_update(&dev, 0.0f64).unwrap();
        assert_eq!(device_read(&dev), ConfidenceByte(0));
        device_update(&dev, 0.52f64).unwrap();
        assert_eq!(device_read(&dev), ConfidenceByte(133));
        device_update(&dev, 1.0f64).unwrap();
        assert_eq!(decode_confidence::<f64>(device_read(&dev)), 1.0);
        assert!(device_update(&dev, -0.1f64).is_err());
        assert_eq!(device_read(&dev), ConfidenceByte(255));
    }

    #[test]
    fn address_range() {
        assert!(SimDevice::new(0x07, ConfidenceByte(0)).is_err());
        assert!(SimDevice::new(0x78, ConfidenceByte(0)).is_err());
        assert!(SimDevice::new(0x08, ConfidenceByte(0)).is_ok());
        assert_eq!(SimDevice::default().address(), 0x62);
    }

    #[test]
    fn loopback_host() {
        let dev = SimDevice::default();
        let mut bus = Loopback::new();
        bus.attach(&dev);
        dev.update(0.52f64).unwrap();
        assert_eq!(bus.transact(&Transaction::Read { address: 0x62, len: 2 }).unwrap(), [133, 133]);
        assert!((bus.read_confidence::<f64>(0x62).unwrap() - 133.0 / 255.0).abs() < 1e-15);
        assert!(matches!(
            bus.transact(&Transaction::Read { address: 0x10, len: 1 }),
            Err(Error::Nack { address: 0x10 })
        ));
        assert!(matches!(
            bus.transact(&Transaction::Write { address: 0x62, data: vec![1] }),
            Err(Error::ReadOnly { .. })
        ));
        assert_eq!(dev.read_count(), 3);
    }

    #[test]
    fn concurrent_readers_see_written_values() {
        let dev = Arc::new(SimDevice::default());
        let written: Vec<u8> = (0..=255u8).step_by(17).collect();
        let writer = {
            let dev = Arc::clone(&dev);
            let written = written.clone();
            std::thread::spawn(move || {
                for _ in 0..200 {
                    for &b in &written {
                        dev.update(f64::from(b) / 255.0).unwrap();
                    }
                }
            })
        };
        let readers: Vec<_> = (0..4)
            .map(|_| {
                let dev = Arc::clone(&dev);
                std::thread::spawn(move || (0..5000).map(|_| dev.read().0).collect::<Vec<_>>())
            })
            .collect();
        writer.join().unwrap();
        for r in readers {
            for b in r.join().unwrap() {
                assert!(b == 0 || written.contains(&b), "observed unwritten byte {b}");
            }
        }
        assert_eq!(dev.read_count(), 20_000);
    }

    proptest! {
        #[test]
        fn round_trip_bound(p in 0.0f64..=1.0) {
            let back: f64 = decode_confidence(encode_confidence(p).unwrap());
            prop_assert!((back - p).abs() <= 0.5 / 255.0);
        }

        #[test]
        fn encode_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(encode_confidence(lo).unwrap() <= encode_confidence(hi).unwrap());
        }
    }

    #[test]
    fn grid_points_round_trip_exactly() {
        for k in 0..=255u8 {
            let p = f64::from(k) / 255.0;
            assert_eq!(decode_confidence::<f64>(encode_confidence(p).unwrap()), p);
            if k > 0 {
                assert!(decode_confidence::<f64>(ConfidenceByte(k)) > decode_confidence::<f64>(ConfidenceByte(k - 1)));
            }
        }
    }
}
