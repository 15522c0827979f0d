// SPDX-License-Identifier: Apache-2.0

#ifndef MBSPLICE_CSV_HPP
#define MBSPLICE_CSV_HPP

#include <string>
#include <vector>

#include "mbsplice/types.hpp"

namespace mbsplice {

/// Format a double with 17 significant digits (round-trips exactly).
std::string g17(double v);

// CSI interchange: header `band,subcarrier,re,im`, band 1-based, subcarrier
// the signed index n. A leading `# kind=<kind>` metadata line records the
// matrix kind. Rows are ordered band-major, subcarrier ascending.
void write_csi(const std::string& path, const CsiMatrix& csi);
CsiMatrix read_csi(const std::string& path);

// CIR interchange: header `delay_s,gain_re,gain_im`, sorted by delay.
void write_cir(const std::string& path, const Cir& cir);
Cir read_cir(const std::string& path);

// Handshake samples: header `band,tx_re,tx_im,rx_re,rx_im`, band 1-based.
void write_handshake(const std::string& path, const HandshakeSamples& hs);
HandshakeSamples read_handshake(const std::string& path);

/// Write arbitrary rows under a header line; every double cell uses g17.
void write_table(const std::string& path, const std::string& header,
                 const std::vector<std::vector<double>>& rows);

}  // namespace mbsplice

#endif  // MBSPLICE_CSV_HPP
