#ifndef MYOPIC_STATE_HPP
#define MYOPIC_STATE_HPP

#include <algorithm>
#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "myopic/config.hpp"
#include "myopic/error.hpp"

namespace myopic {

inline constexpr std::uint64_t kDefaultStateCap = std::uint64_t{1} << 24;

struct StateSpaceSize {
  int l_beta = 0;          // total buffer cells, sum of L_i over relays
  int bits = 0;            // l_beta + nu
  std::uint64_t states = 0;  // M = 2^bits
};

/// L_beta = (2N - k + 1) k / 2 and M = 2^(L_beta + nu).
inline StateSpaceSize state_space_size(const NetworkConfig& cfg,
                                       std::uint64_t cap = kDefaultStateCap) {
  StateSpaceSize s;
  s.l_beta = (2 * cfg.n_relays() - cfg.k_hops() + 1) * cfg.k_hops() / 2;
  s.bits = s.l_beta + cfg.nu();
  if (s.bits >= 63 || (std::uint64_t{1} << s.bits) > cap) {
    throw StateSpaceError("state space 2^" + std::to_string(s.bits) +
                          " exceeds the cap of " + std::to_string(cap) + " states");
  }
  s.states = std::uint64_t{1} << s.bits;
  return s;
}

/// One Markov-chain state in unpacked form.
struct NetworkState {
  std::uint64_t index = 1;                        // m in 1..M
  std::vector<std::uint8_t> relay_bits;           // lambda_{H(1)} .. lambda_{H(nu)}
  std::vector<std::vector<std::uint8_t>> buffers; // buffers[i-1] = beta_i, length L_i

  friend bool operator==(const NetworkState&, const NetworkState&) = default;
};

/// Bit layout of a packed state. The packed code is m - 1; the relay bits
/// are the most significant, followed by beta_1[1..L_1], beta_2[1..L_2], ...
class StateLayout {
public:
  explicit StateLayout(const NetworkConfig& cfg, std::uint64_t cap = kDefaultStateCap)
      : cfg_(cfg), size_(state_space_size(cfg, cap)) {
    offsets_.assign(static_cast<std::size_t>(cfg.n_relays() + 1), 0);
    int pos = cfg.nu();
    for (int i = 1; i <= cfg.n_relays(); ++i) {
      offsets_[static_cast<std::size_t>(i)] = pos;
      pos += cfg.buffer_length(i);
    }
  }

  const NetworkConfig& config() const { return cfg_; }
  std::uint64_t states() const { return size_.states; }
  int bits() const { return size_.bits; }
  int l_beta() const { return size_.l_beta; }

  /// Shift that extracts the bit at layout position pos (0 = most significant).
  int shift_of(int pos) const { return size_.bits - 1 - pos; }

  int bit(std::uint64_t code, int pos) const {
    return static_cast<int>((code >> shift_of(pos)) & 1u);
  }

  /// Layout position of beta_i[n], n in 1..L_i.
  int buffer_pos(int relay, int cell) const {
    return offsets_[static_cast<std::size_t>(relay)] + cell - 1;
  }

  int buffer_bit(std::uint64_t code, int relay, int cell) const {
    return bit(code, buffer_pos(relay, cell));
  }

  /// lambda_i for a dual-mode relay; always 1 for always-active nodes.
  int mode_bit(std::uint64_t code, int node) const {
    const int rank = cfg_.dual_rank(node);
    return rank < 0 ? 1 : bit(code, rank);
  }

  /// 1_{(i -> j), m}: node i carries a signal for node j in state code.
  /// Source is a virtual node with an all-ones buffer.
  int link_indicator(int i, int j, std::uint64_t code) const {
    if (i == 0) return 1;
    return buffer_bit(code, i, j - i) & mode_bit(code, i);
  }

  /// Bitmask of transmitters feeding receiver j: bit (j - i - 1) for node i.
  unsigned incoming_mask(int j, std::uint64_t code) const {
    unsigned mask = 0;
    const int first = std::max(0, j - cfg_.k_hops());
    for (int i = first; i < j; ++i) {
      if (link_indicator(i, j, code)) mask |= 1u << (j - i - 1);
    }
    return mask;
  }

  /// C_{j,m}.
  int active_transmitter_count(int j, std::uint64_t code) const {
    return std::popcount(incoming_mask(j, code));
  }

  NetworkState decode(std::uint64_t index) const {
    if (index < 1 || index > size_.states) {
      throw Error("state index " + std::to_string(index) + " outside 1.." +
                  std::to_string(size_.states));
    }
    const std::uint64_t code = index - 1;
    NetworkState s;
    s.index = index;
    for (int r = 0; r < cfg_.nu(); ++r) s.relay_bits.push_back(static_cast<std::uint8_t>(bit(code, r)));
    for (int i = 1; i <= cfg_.n_relays(); ++i) {
      std::vector<std::uint8_t> beta;
      for (int n = 1; n <= cfg_.buffer_length(i); ++n) {
        beta.push_back(static_cast<std::uint8_t>(buffer_bit(code, i, n)));
      }
      s.buffers.push_back(std::move(beta));
    }
    return s;
  }

  std::uint64_t encode(const NetworkState& s) const {
    if (s.relay_bits.size() != static_cast<std::size_t>(cfg_.nu()) ||
        s.buffers.size() != static_cast<std::size_t>(cfg_.n_relays())) {
      throw Error("state shape does not match the network");
    }
    std::uint64_t code = 0;
    auto put = [&](int pos, int v) {
      if (v) code |= std::uint64_t{1} << shift_of(pos);
    };
    for (int r = 0; r < cfg_.nu(); ++r) put(r, s.relay_bits[static_cast<std::size_t>(r)]);
    for (int i = 1; i <= cfg_.n_relays(); ++i) {
      const auto& beta = s.buffers[static_cast<std::size_t>(i - 1)];
      if (beta.size() != static_cast<std::size_t>(cfg_.buffer_length(i))) {
        throw Error("buffer " + std::to_string(i) + " has the wrong length");
      }
      for (int n = 1; n <= cfg_.buffer_length(i); ++n) put(buffer_pos(i, n), beta[static_cast<std::size_t>(n - 1)]);
    }
    return code + 1;
  }

  /// Overloads on unpacked states.
  int link_indicator(int i, int j, const NetworkState& s) const {
    return link_indicator(i, j, s.index - 1);
  }
  int active_transmitter_count(int j, const NetworkState& s) const {
    return active_transmitter_count(j, s.index - 1);
  }

private:
  NetworkConfig cfg_;
  StateSpaceSize size_;
  std::vector<int> offsets_;
};

}  // namespace myopic

#endif  // MYOPIC_STATE_HPP
