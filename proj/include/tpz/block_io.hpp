#pragma once

#include <iosfwd>
#include <string>

#include "tpz/types.hpp"

namespace tpz {

enum class BlockFormat { Csv, Binary };

/// Binary when the path ends in ".bin", CSV otherwise.
BlockFormat format_for_path(const std::string& path);

/// CSV columns: k,row,col,re,im (k is 1-based, row/col 0-based).
void write_csv(std::ostream& out, const BlockVector& v);
BlockVector read_block_vector_csv(std::istream& in);

/// CSV columns: s,t,row,col,re,im.
void write_csv(std::ostream& out, const BlockMatrix& m);
BlockMatrix read_block_matrix_csv(std::istream& in);

/// Binary layout: eight little-endian int64 values (magic, version, n, d,
/// layout, 0, 0, 0) followed by the complex entries as (re, im) doubles in
/// column-major order of the underlying dense matrix.
inline constexpr std::int64_t kBinaryMagic = 0x5450'5a42'4c4b'0001;  // "TPZBLK"
inline constexpr std::int64_t kLayoutVector = 1;
inline constexpr std::int64_t kLayoutMatrix = 2;

void write_binary(std::ostream& out, const BlockVector& v);
void write_binary(std::ostream& out, const BlockMatrix& m);
BlockVector read_block_vector_binary(std::istream& in);
BlockMatrix read_block_matrix_binary(std::istream& in);

BlockVector load_block_vector(const std::string& path);
void save(const BlockVector& v, const std::string& path);
BlockMatrix load_block_matrix(const std::string& path);
void save(const BlockMatrix& m, const std::string& path);

}  // namespace tpz
