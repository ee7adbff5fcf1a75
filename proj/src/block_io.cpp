#include "tpz/block_io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>
#include <vector>

namespace tpz {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

bool is_header(const std::string& line) {
  for (char c : line) {
    if (c == ' ' || c == '\t') continue;
    return !(c == '-' || c == '+' || (c >= '0' && c <= '9'));
  }
  return true;
}

/// Parses rows of `nidx` integer indices followed by re, im.
std::vector<std::pair<std::vector<long>, cplx>> parse_rows(std::istream& in, std::size_t nidx) {
  std::vector<std::pair<std::vector<long>, cplx>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || is_header(line)) continue;
    const auto cells = split(line);
    if (cells.size() != nidx + 2) {
      throw Error(ErrorCode::Io, "line " + std::to_string(lineno) + ": expected " +
                                     std::to_string(nidx + 2) + " columns");
    }
    try {
      std::vector<long> idx;
      for (std::size_t i = 0; i < nidx; ++i) idx.push_back(std::stol(cells[i]));
      rows.emplace_back(idx, cplx(std::stod(cells[nidx]), std::stod(cells[nidx + 1])));
    } catch (const std::exception&) {
      throw Error(ErrorCode::Io, "line " + std::to_string(lineno) + ": bad number");
    }
  }
  return rows;
}

void write_header(std::ostream& out, std::int64_t n, std::int64_t d, std::int64_t layout) {
  const std::int64_t header[8] = {kBinaryMagic, 1, n, d, layout, 0, 0, 0};
  out.write(reinterpret_cast<const char*>(header), sizeof header);
}

void write_payload(std::ostream& out, const Mat& m) {
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      const double v[2] = {m(i, j).real(), m(i, j).imag()};
      out.write(reinterpret_cast<const char*>(v), sizeof v);
    }
  }
  if (!out) throw Error(ErrorCode::Io, "write failed");
}

Mat read_payload(std::istream& in, std::int64_t expect_layout, Index rows_per_n, Index& n,
                 Index& d) {
  std::int64_t header[8];
  in.read(reinterpret_cast<char*>(header), sizeof header);
  if (!in || header[0] != kBinaryMagic) throw Error(ErrorCode::Io, "not a block binary file");
  if (header[1] != 1) throw Error(ErrorCode::Io, "unsupported binary version");
  if (header[4] != expect_layout) throw Error(ErrorCode::Io, "unexpected binary layout");
  n = header[2];
  d = header[3];
  if (n < 0 || d < 1) throw Error(ErrorCode::Io, "bad binary dimensions");
  const Index rows = n * d;
  const Index cols = rows_per_n == 0 ? d : n * d;
  Mat m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      double v[2];
      in.read(reinterpret_cast<char*>(v), sizeof v);
      if (!in) throw Error(ErrorCode::Io, "truncated binary payload");
      m(i, j) = cplx(v[0], v[1]);
    }
  }
  return m;
}

}  // namespace

BlockFormat format_for_path(const std::string& path) {
  const std::string ext = ".bin";
  if (path.size() >= ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0) {
    return BlockFormat::Binary;
  }
  return BlockFormat::Csv;
}

void write_csv(std::ostream& out, const BlockVector& v) {
  out << "k,row,col,re,im\n";
  for (Index k = 1; k <= v.n(); ++k) {
    const Mat b = v.block(k);
    for (Index r = 0; r < v.d(); ++r) {
      for (Index c = 0; c < v.d(); ++c) {
        out << k << ',' << r << ',' << c << ',' << fmt(b(r, c).real()) << ','
            << fmt(b(r, c).imag()) << '\n';
      }
    }
  }
}

BlockVector read_block_vector_csv(std::istream& in) {
  const auto rows = parse_rows(in, 3);
  long n = 0;
  long d = 0;
  for (const auto& [idx, val] : rows) {
    if (idx[0] < 1 || idx[1] < 0 || idx[2] < 0) throw Error(ErrorCode::Io, "negative index");
    n = std::max(n, idx[0]);
    d = std::max({d, idx[1] + 1, idx[2] + 1});
  }
  if (n == 0) throw Error(ErrorCode::Io, "empty block vector");
  BlockVector v(n, d);
  for (const auto& [idx, val] : rows) v.block(idx[0])(idx[1], idx[2]) = val;
  return v;
}

void write_csv(std::ostream& out, const BlockMatrix& m) {
  out << "s,t,row,col,re,im\n";
  for (Index s = 1; s <= m.n(); ++s) {
    for (Index t = 1; t <= m.n(); ++t) {
      const Mat b = m.block(s, t);
      for (Index r = 0; r < m.d(); ++r) {
        for (Index c = 0; c < m.d(); ++c) {
          out << s << ',' << t << ',' << r << ',' << c << ',' << fmt(b(r, c).real()) << ','
              << fmt(b(r, c).imag()) << '\n';
        }
      }
    }
  }
}

BlockMatrix read_block_matrix_csv(std::istream& in) {
  const auto rows = parse_rows(in, 4);
  long n = 0;
  long d = 0;
  for (const auto& [idx, val] : rows) {
    if (idx[0] < 1 || idx[1] < 1 || idx[2] < 0 || idx[3] < 0) {
      throw Error(ErrorCode::Io, "bad index");
    }
    n = std::max({n, idx[0], idx[1]});
    d = std::max({d, idx[2] + 1, idx[3] + 1});
  }
  if (n == 0) throw Error(ErrorCode::Io, "empty block matrix");
  BlockMatrix m(n, d);
  for (const auto& [idx, val] : rows) m.block(idx[0], idx[1])(idx[2], idx[3]) = val;
  return m;
}

void write_binary(std::ostream& out, const BlockVector& v) {
  write_header(out, v.n(), v.d(), kLayoutVector);
  write_payload(out, v.matrix());
}

void write_binary(std::ostream& out, const BlockMatrix& m) {
  write_header(out, m.n(), m.d(), kLayoutMatrix);
  write_payload(out, m.matrix());
}

BlockVector read_block_vector_binary(std::istream& in) {
  Index n = 0;
  Index d = 0;
  Mat data = read_payload(in, kLayoutVector, 0, n, d);
  return BlockVector(std::move(data), d);
}

BlockMatrix read_block_matrix_binary(std::istream& in) {
  Index n = 0;
  Index d = 0;
  Mat data = read_payload(in, kLayoutMatrix, 1, n, d);
  return BlockMatrix(std::move(data), d);
}

BlockVector load_block_vector(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return format_for_path(path) == BlockFormat::Binary ? read_block_vector_binary(in)
                                                      : read_block_vector_csv(in);
}

void save(const BlockVector& v, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  if (format_for_path(path) == BlockFormat::Binary) {
    write_binary(out, v);
  } else {
    write_csv(out, v);
  }
}

BlockMatrix load_block_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return format_for_path(path) == BlockFormat::Binary ? read_block_matrix_binary(in)
                                                      : read_block_matrix_csv(in);
}

void save(const BlockMatrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  if (format_for_path(path) == BlockFormat::Binary) {
    write_binary(out, m);
  } else {
    write_csv(out, m);
  }
}

}  // namespace tpz
