// SPDX-License-Identifier: Apache-2.0

#include "mbsplice/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace mbsplice {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return in;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

double to_double(const std::string& s, const std::string& path) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw std::runtime_error("bad number '" + s + "' in " + path);
  return v;
}

long to_long(const std::string& s, const std::string& path) {
  char* end = nullptr;
  long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str()) throw std::runtime_error("bad integer '" + s + "' in " + path);
  return v;
}

// Reads data lines, skipping `#` metadata (captured into meta) and verifying
// the header.
std::vector<std::vector<std::string>> read_rows(const std::string& path,
                                                const std::string& header,
                                                std::vector<std::string>* meta) {
  auto in = open_in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (meta) meta->push_back(line);
      continue;
    }
    if (!saw_header) {
      if (line != header)
        throw std::runtime_error(path + ": expected header '" + header +
                                 "', got '" + line + "'");
      saw_header = true;
      continue;
    }
    rows.push_back(split_fields(line));
  }
  if (!saw_header) throw std::runtime_error(path + ": missing header");
  return rows;
}

}  // namespace

void write_csi(const std::string& path, const CsiMatrix& csi) {
  auto out = open_out(path);
  out << "# kind=" << to_string(csi.kind) << "\n";
  out << "band,subcarrier,re,im\n";
  int half = (csi.subcarriers_per_band() - 1) / 2;
  for (int m = 0; m < csi.num_bands(); ++m)
    for (int j = 0; j < csi.subcarriers_per_band(); ++j)
      out << (m + 1) << ',' << (j - half) << ',' << g17(csi.values(m, j).real())
          << ',' << g17(csi.values(m, j).imag()) << "\n";
}

CsiMatrix read_csi(const std::string& path) {
  std::vector<std::string> meta;
  auto rows = read_rows(path, "band,subcarrier,re,im", &meta);
  if (rows.empty()) throw std::runtime_error(path + ": no CSI rows");

  CsiKind kind = CsiKind::ideal;
  for (const auto& line : meta) {
    auto pos = line.find("kind=");
    if (pos != std::string::npos) kind = csi_kind_from_string(line.substr(pos + 5));
  }

  long bands = 0, min_n = 0, max_n = 0;
  for (const auto& r : rows) {
    if (r.size() != 4) throw std::runtime_error(path + ": malformed CSI row");
    bands = std::max(bands, to_long(r[0], path));
    min_n = std::min(min_n, to_long(r[1], path));
    max_n = std::max(max_n, to_long(r[1], path));
  }
  if (max_n != -min_n)
    throw std::runtime_error(path + ": subcarrier indices must be symmetric");
  int n_sub = static_cast<int>(2 * max_n + 1);

  CsiMatrix csi;
  csi.kind = kind;
  csi.values = CMat::Zero(bands, n_sub);
  for (const auto& r : rows) {
    long m = to_long(r[0], path) - 1;
    long j = to_long(r[1], path) + max_n;
    csi.values(m, j) = Complex(to_double(r[2], path), to_double(r[3], path));
  }
  return csi;
}

void write_cir(const std::string& path, const Cir& cir) {
  auto out = open_out(path);
  out << "delay_s,gain_re,gain_im\n";
  for (const Tap& tap : cir.taps)
    out << g17(tap.delay) << ',' << g17(tap.gain.real()) << ','
        << g17(tap.gain.imag()) << "\n";
}

Cir read_cir(const std::string& path) {
  auto rows = read_rows(path, "delay_s,gain_re,gain_im", nullptr);
  Cir cir;
  for (const auto& r : rows) {
    if (r.size() != 3) throw std::runtime_error(path + ": malformed CIR row");
    cir.taps.push_back({to_double(r[0], path),
                        Complex(to_double(r[1], path), to_double(r[2], path))});
  }
  cir.validate();
  return cir;
}

void write_handshake(const std::string& path, const HandshakeSamples& hs) {
  auto out = open_out(path);
  out << "band,tx_re,tx_im,rx_re,rx_im\n";
  for (int m = 0; m < hs.num_bands(); ++m)
    out << (m + 1) << ',' << g17(hs.tx[static_cast<size_t>(m)].real()) << ','
        << g17(hs.tx[static_cast<size_t>(m)].imag()) << ','
        << g17(hs.rx[static_cast<size_t>(m)].real()) << ','
        << g17(hs.rx[static_cast<size_t>(m)].imag()) << "\n";
}

HandshakeSamples read_handshake(const std::string& path) {
  auto rows = read_rows(path, "band,tx_re,tx_im,rx_re,rx_im", nullptr);
  HandshakeSamples hs;
  hs.tx.resize(rows.size());
  hs.rx.resize(rows.size());
  for (const auto& r : rows) {
    if (r.size() != 5) throw std::runtime_error(path + ": malformed handshake row");
    size_t m = static_cast<size_t>(to_long(r[0], path) - 1);
    if (m >= rows.size()) throw std::runtime_error(path + ": band index out of range");
    hs.tx[m] = Complex(to_double(r[1], path), to_double(r[2], path));
    hs.rx[m] = Complex(to_double(r[3], path), to_double(r[4], path));
  }
  return hs;
}

void write_table(const std::string& path, const std::string& header,
                 const std::vector<std::vector<double>>& rows) {
  auto out = open_out(path);
  out << header << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << g17(row[i]);
    }
    out << "\n";
  }
}

}  // namespace mbsplice
