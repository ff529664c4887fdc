//! Sponge-based lightweight AEAD inside the 802.1X 4-way handshake, carried
//! over a simulated 802.11a OFDM baseband link, with a timing model driven by
//! microcontroller cycle counts.

pub mod channel;
pub mod handshake;
pub mod ofdm;
pub mod perf;
pub mod sim;
pub mod sponge;
