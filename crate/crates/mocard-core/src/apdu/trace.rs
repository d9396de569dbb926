//! Hex-dump trace lines: one line per direction, `>` host-to-card and
//! `<` card-to-host, uppercase hex with a space between bytes.

use super::ApduResponse;

fn hex_join(bytes: &[u8]) -> String {
    bytes
        .iter()
        .map(|b| format!("{b:02X}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn command_line(raw: &[u8]) -> String {
    format!("> {}", hex_join(raw))
}

pub fn response_line(resp: &ApduResponse) -> String {
    format!("< {}", hex_join(&resp.to_bytes()))
}
