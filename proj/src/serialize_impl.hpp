#pragma once

// Binary serialization shared by the checkpoint file and the fit sample
// archive. Host-endian, length-prefixed blocks; Eigen buffers dumped in
// their native column-major layout.

#include <Eigen/Dense>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "biplink/gibbs.hpp"
#include "biplink/model.hpp"

namespace biplink::serial {

struct Writer {
  std::ofstream os;
  std::string label;

  Writer(const std::string& path, std::string what) : os(path, std::ios::binary),
                                                      label(std::move(what)) {
    if (!os) throw std::runtime_error(label + ": cannot open '" + path + "' for writing");
  }

  template <typename T>
  void pod(const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }

  void vec_d(const std::vector<double>& v) {
    pod(static_cast<std::uint64_t>(v.size()));
    if (!v.empty()) os.write(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
  }

  void evec(const Eigen::VectorXd& v) {
    pod(static_cast<std::uint64_t>(v.size()));
    if (v.size() > 0) os.write(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
  }

  void emat(const Eigen::MatrixXd& m) {
    pod(static_cast<std::uint64_t>(m.rows()));
    pod(static_cast<std::uint64_t>(m.cols()));
    if (m.size() > 0) os.write(reinterpret_cast<const char*>(m.data()), m.size() * sizeof(double));
  }

  void bmat(const BinMatrix& m) {
    pod(static_cast<std::uint64_t>(m.rows()));
    pod(static_cast<std::uint64_t>(m.cols()));
    if (m.size() > 0) os.write(reinterpret_cast<const char*>(m.data()), m.size());
  }

  void bytes(const std::vector<std::uint8_t>& v) {
    pod(static_cast<std::uint64_t>(v.size()));
    if (!v.empty()) os.write(reinterpret_cast<const char*>(v.data()), v.size());
  }

  void mats(const std::vector<Eigen::MatrixXd>& ms) {
    pod(static_cast<std::uint64_t>(ms.size()));
    for (const auto& m : ms) emat(m);
  }
};

struct Reader {
  std::ifstream is;
  std::string path;
  std::string label;

  Reader(const std::string& p, std::string what) : is(p, std::ios::binary), path(p),
                                                   label(std::move(what)) {}

  [[noreturn]] void fail(const std::string& what) {
    throw std::runtime_error(label + " '" + path + "': " + what);
  }

  template <typename T>
  void pod(T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) fail("truncated file");
  }

  std::uint64_t len() {
    std::uint64_t n = 0;
    pod(n);
    if (n > (1ull << 33)) fail("implausible block length");
    return n;
  }

  void vec_d(std::vector<double>& v) {
    v.resize(len());
    if (!v.empty()) {
      is.read(reinterpret_cast<char*>(v.data()), v.size() * sizeof(double));
      if (!is) fail("truncated file");
    }
  }

  void evec(Eigen::VectorXd& v) {
    v.resize(static_cast<Eigen::Index>(len()));
    if (v.size() > 0) {
      is.read(reinterpret_cast<char*>(v.data()), v.size() * sizeof(double));
      if (!is) fail("truncated file");
    }
  }

  void emat(Eigen::MatrixXd& m) {
    const auto r = static_cast<Eigen::Index>(len());
    const auto c = static_cast<Eigen::Index>(len());
    m.resize(r, c);
    if (m.size() > 0) {
      is.read(reinterpret_cast<char*>(m.data()), m.size() * sizeof(double));
      if (!is) fail("truncated file");
    }
  }

  void bmat(BinMatrix& m) {
    const auto r = static_cast<Eigen::Index>(len());
    const auto c = static_cast<Eigen::Index>(len());
    m.resize(r, c);
    if (m.size() > 0) {
      is.read(reinterpret_cast<char*>(m.data()), m.size());
      if (!is) fail("truncated file");
    }
  }

  void bytes(std::vector<std::uint8_t>& v) {
    v.resize(len());
    if (!v.empty()) {
      is.read(reinterpret_cast<char*>(v.data()), v.size());
      if (!is) fail("truncated file");
    }
  }

  void mats(std::vector<Eigen::MatrixXd>& ms) {
    ms.resize(len());
    for (auto& m : ms) emat(m);
  }
};

inline void write_state(Writer& w, const LatentState& st) {
  w.emat(st.U);
  w.emat(st.V);
  w.pod(st.lambda0);
  w.evec(st.lambda);
  w.evec(st.mgp_deltas);
  w.pod(st.rho_U);
  w.pod(st.rho_V);
  w.evec(st.beta0);
  w.emat(st.beta);
  w.evec(st.gamma0);
  w.emat(st.gamma);
  w.evec(st.trait_vars_animal);
  w.evec(st.trait_vars_plant);
  w.pod(st.delta0);
  w.evec(st.delta);
  w.pod(st.zeta0);
  w.evec(st.zeta);
  w.evec(st.p);
  w.evec(st.q);
  w.bmat(st.L);
  w.bmat(st.O_F);
  w.bmat(st.O_P);
  w.emat(st.pi_F);
  w.emat(st.pi_P);
  w.pod(static_cast<std::uint64_t>(st.trials.triples.size()));
  for (const Triple& t : st.trials.triples) {
    w.pod(t.animal);
    w.pod(t.plant);
    w.pod(t.study);
  }
  w.bytes(st.trials.a);
  w.bytes(st.trials.d_f);
  w.bytes(st.trials.d_p);
}

inline void read_state(Reader& r, LatentState& st) {
  r.emat(st.U);
  r.emat(st.V);
  r.pod(st.lambda0);
  r.evec(st.lambda);
  r.evec(st.mgp_deltas);
  r.pod(st.rho_U);
  r.pod(st.rho_V);
  r.evec(st.beta0);
  r.emat(st.beta);
  r.evec(st.gamma0);
  r.emat(st.gamma);
  r.evec(st.trait_vars_animal);
  r.evec(st.trait_vars_plant);
  r.pod(st.delta0);
  r.evec(st.delta);
  r.pod(st.zeta0);
  r.evec(st.zeta);
  r.evec(st.p);
  r.evec(st.q);
  r.bmat(st.L);
  r.bmat(st.O_F);
  r.bmat(st.O_P);
  r.emat(st.pi_F);
  r.emat(st.pi_P);
  st.trials.triples.resize(r.len());
  for (Triple& t : st.trials.triples) {
    r.pod(t.animal);
    r.pod(t.plant);
    r.pod(t.study);
  }
  r.bytes(st.trials.a);
  r.bytes(st.trials.d_f);
  r.bytes(st.trials.d_p);
}

inline void write_output(Writer& w, const ChainOutput& o) {
  w.mats(o.prob_samples);
  w.mats(o.occ_f_samples);
  w.mats(o.occ_p_samples);
  w.vec_d(o.loglik_trace);
  w.vec_d(o.rho_u_trace);
  w.vec_d(o.rho_v_trace);
  w.vec_d(o.lambda0_trace);
  w.pod(static_cast<std::int64_t>(o.occ_proposals));
  w.pod(static_cast<std::int64_t>(o.occ_accepts));
  w.pod(static_cast<std::uint8_t>(o.variant == Variant::coil_plus ? 1 : 0));
  w.pod(static_cast<std::int64_t>(o.n_iter));
  w.pod(static_cast<std::int64_t>(o.n_burn));
}

inline void read_output(Reader& r, ChainOutput& o) {
  o = ChainOutput{};
  r.mats(o.prob_samples);
  r.mats(o.occ_f_samples);
  r.mats(o.occ_p_samples);
  r.vec_d(o.loglik_trace);
  r.vec_d(o.rho_u_trace);
  r.vec_d(o.rho_v_trace);
  r.vec_d(o.lambda0_trace);
  std::int64_t props = 0, accs = 0;
  r.pod(props);
  r.pod(accs);
  o.occ_proposals = static_cast<long>(props);
  o.occ_accepts = static_cast<long>(accs);
  std::uint8_t var = 0;
  r.pod(var);
  o.variant = var ? Variant::coil_plus : Variant::coil;
  std::int64_t ni = 0, nb = 0;
  r.pod(ni);
  r.pod(nb);
  o.n_iter = static_cast<int>(ni);
  o.n_burn = static_cast<int>(nb);
}

}  // namespace biplink::serial
