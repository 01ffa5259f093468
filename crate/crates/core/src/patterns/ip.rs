use std::net::{IpAddr, Ipv4Addr, Ipv6Addr};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IpKind {
    Public,
    Private,
    Loopback,
    Reserved,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IpRecord {
    pub address: IpAddr,
    pub kind: IpKind,
    pub port: Option<u16>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed IP literal `{0}`")]
pub struct MalformedIp(pub String);

fn in_v4(a: Ipv4Addr, net: [u8; 4], prefix: u32) -> bool {
    let mask = if prefix == 0 { 0 } else { u32::MAX << (32 - prefix) };
    (u32::from(a) & mask) == (u32::from(Ipv4Addr::from(net)) & mask)
}

pub fn kind_v4(a: Ipv4Addr) -> IpKind {
    if a.is_loopback() {
        return IpKind::Loopback;
    }
    if a.is_private() {
        return IpKind::Private;
    }
    const RESERVED: &[([u8; 4], u32)] = &[
        ([0, 0, 0, 0], 8),
        ([100, 64, 0, 0], 10),
        ([169, 254, 0, 0], 16),
        ([192, 0, 0, 0], 24),
        ([192, 0, 2, 0], 24),
        ([192, 88, 99, 0], 24),
        ([198, 18, 0, 0], 15),
        ([198, 51, 100, 0], 24),
        ([203, 0, 113, 0], 24),
        ([224, 0, 0, 0], 4),
        ([240, 0, 0, 0], 4),
    ];
    if RESERVED.iter().any(|(n, p)| in_v4(a, *n, *p)) {
        IpKind::Reserved
    } else {
        IpKind::Public
    }
}

pub fn kind_v6(a: Ipv6Addr) -> IpKind {
    if a.is_loopback() {
        return IpKind::Loopback;
    }
    if let Some(v4) = a.to_ipv4_mapped() {
        return kind_v4(v4);
    }
    let s = a.segments();
    if (s[0] & 0xfe00) == 0xfc00 {
        IpKind::Private
    } else if a.is_unspecified() || a.is_multicast() || (s[0] & 0xffc0) == 0xfe80 || (s[0] == 0x2001 && s[1] == 0x0db8)
    {
        IpKind::Reserved
    } else if (s[0] & 0xe000) == 0x2000 {
        IpKind::Public
    } else {
        IpKind::Reserved
    }
}

pub fn kind_of(a: IpAddr) -> IpKind {
    match a {
        IpAddr::V4(v4) => kind_v4(v4),
        IpAddr::V6(v6) => kind_v6(v6),
    }
}

/// Parses `a.b.c.d`, `a.b.c.d:port`, a bare v6 literal, or `[v6]:port`.
pub fn classify_ip(text: &str) -> Result<IpRecord, MalformedIp> {
    let bad = || MalformedIp(text.to_string());
    let (addr, port) = if let Some(rest) = text.strip_prefix('[') {
        let (inside, after) = rest.split_once(']').ok_or_else(bad)?;
        let port = match after {
            "" => None,
            p => Some(p.strip_prefix(':').ok_or_else(bad)?.parse::<u16>().map_err(|_| bad())?),
        };
        (IpAddr::V6(inside.parse().map_err(|_| bad())?), port)
    } else if let Ok(v6) = text.parse::<Ipv6Addr>() {
        (IpAddr::V6(v6), None)
    } else {
        let (host, port) = match text.rsplit_once(':') {
            Some((h, p)) => (h, Some(p.parse::<u16>().map_err(|_| bad())?)),
            None => (text, None),
        };
        (IpAddr::V4(host.parse().map_err(|_| bad())?), port)
    };
    Ok(IpRecord { address: addr, kind: kind_of(addr), port })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(classify_ip("127.0.0.1").unwrap().kind, IpKind::Loopback);
        assert_eq!(classify_ip("10.0.0.5").unwrap().kind, IpKind::Private);
        let r = classify_ip("8.8.8.8:9100").unwrap();
        assert_eq!((r.kind, r.port), (IpKind::Public, Some(9100)));
        assert_eq!(classify_ip("203.0.113.9").unwrap().kind, IpKind::Reserved);
        assert_eq!(classify_ip("[::1]:80").unwrap().kind, IpKind::Loopback);
        assert_eq!(classify_ip("2a00:1450:4001::1").unwrap().kind, IpKind::Public);
        assert!(classify_ip("300.1.1.1").is_err());
        assert!(classify_ip("1.2.3").is_err());
    }
}
