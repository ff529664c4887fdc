use num_complex::Complex32;

use super::SimError;
use crate::channel::{derive_seed, ChannelConfig};
use crate::ofdm::{
    demodulate_frame, transmit_frame, CarrierPlan, IqBuffer, Modulation, OfdmError, RxFrame,
    TaggedPayload, PAYLOAD_LEN,
};

/// Idle samples around each burst so the receiver has to find the frame.
pub const LEAD_IN: usize = 64;
pub const TAIL: usize = 32;

/// One direction of the simulated radio: modulator, channel, demodulator.
#[derive(Debug, Clone)]
pub struct Link {
    pub modulation: Modulation,
    pub plan: CarrierPlan,
    pub gain: f64,
    pub channel: ChannelConfig,
    pub threshold: f64,
}

impl Link {
    pub fn new(modulation: Modulation, gain: f64, channel: ChannelConfig, threshold: f64) -> Self {
        Self {
            modulation,
            plan: CarrierPlan::ieee80211a(),
            gain,
            channel,
            threshold,
        }
    }

    /// Modulates one payload and passes it through the channel. `stream`
    /// selects the noise realisation.
    pub fn send(&self, payload: &TaggedPayload, stream: u64) -> Result<IqBuffer, SimError> {
        let tx = transmit_frame(payload, self.modulation, &self.plan, self.gain)
            .map_err(|e| SimError::Config(e.to_string()))?;
        let mut samples = vec![Complex32::new(0.0, 0.0); LEAD_IN];
        samples.extend_from_slice(&tx.samples);
        samples.resize(samples.len() + TAIL, Complex32::new(0.0, 0.0));
        let burst = IqBuffer::new(samples);
        self.channel
            .with_seed(derive_seed(self.channel.seed, stream))
            .apply(&burst)
            .map_err(|e| SimError::Config(e.to_string()))
    }

    /// Demodulates without judging the header.
    pub fn demodulate(&self, rx: &IqBuffer) -> Result<RxFrame, OfdmError> {
        demodulate_frame(rx, self.modulation, &self.plan, self.threshold)
    }

    /// Payload of a frame whose header checks out.
    pub fn receive(&self, rx: &IqBuffer) -> Result<[u8; PAYLOAD_LEN], OfdmError> {
        let frame = self.demodulate(rx)?;
        if frame.header_ok {
            Ok(frame.payload)
        } else {
            Err(OfdmError::DecodeFailure("header CRC mismatch".into()))
        }
    }
}
