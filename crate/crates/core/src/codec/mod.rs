//! Huffman coding, update packets and the online baseline.

mod bits;
mod huffman;
mod online;
mod packet;
mod pipeline;

pub use bits::{BitReader, BitWriter};
pub use huffman::{code_lengths, huffman_decode, huffman_encode, BitStream, HuffmanTable};
pub use online::{compression_ratio, online_update_bytes, online_volume, raw_volume};
pub use packet::{
    pack_batch, packet_table, unpack_packet, PackedPacket, PacketConfig, SegmentRecord, UpdatePacket,
    SEGMENT_COUNT_BITS,
};
pub use pipeline::{
    build_group_models, compress_batch, decompress_batch, unpack_batch, CodecConfig, CompressedBatch,
    CompressedPacket, GroupModel,
};
