#include <cstdlib>
#include <sstream>
#include <string>

#include "ifolab/common/errors.hpp"
#include "ifolab/common/text_io.hpp"
#include "ifolab/nn/network.hpp"

namespace ifolab::nn {

namespace {

constexpr const char* kMagic = "ifolab-net v1";

void write_values(std::ostringstream& out, const char* tag, std::span<const double> values) {
  out << tag;
  for (double v : values) out << ' ' << format_double(v);
  out << '\n';
}

class TokenReader {
 public:
  TokenReader(const std::string& text, const std::string& path) : in_(text), path_(path) {}

  std::string word(const char* what) {
    std::string tok;
    if (!(in_ >> tok)) fail(std::string("missing ") + what);
    return tok;
  }

  void expect(const char* tag) {
    const std::string tok = word(tag);
    if (tok != tag) fail(std::string("expected '") + tag + "' but found '" + tok + "'");
  }

  int integer(const char* what) {
    const std::string tok = word(what);
    try {
      std::size_t pos = 0;
      const int v = std::stoi(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      fail(std::string("bad integer for ") + what + ": '" + tok + "'");
    }
  }

  double real(const char* what) {
    const std::string tok = word(what);
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size())
      fail(std::string("bad number for ") + what + ": '" + tok + "'");
    return v;
  }

  void read_values(const char* tag, std::span<double> values) {
    expect(tag);
    for (double& v : values) v = real(tag);
  }

  [[noreturn]] void fail(const std::string& msg) {
    throw DataError(path_ + ": " + msg);
  }

 private:
  std::istringstream in_;
  std::string path_;
};

}  // namespace

void save_network(const Network& net, const std::string& path) {
  std::ostringstream out;
  out << kMagic << '\n';
  out << "layers " << net.layers.size() << '\n';
  for (const Layer& layer : net.layers) {
    if (const auto* dense = std::get_if<DenseLayer>(&layer)) {
      out << "dense " << dense->in_dim() << ' ' << dense->out_dim() << ' '
          << (dense->act == Activation::tanh ? "tanh" : "identity") << '\n';
      write_values(out, "weight", dense->weight.data());
      write_values(out, "bias", dense->bias);
    } else {
      const auto& attn = std::get<SelfAttentionLayer>(layer);
      out << "attention " << attn.tokens << ' ' << attn.token_dim() << '\n';
      write_values(out, "wq", attn.wq.data());
      write_values(out, "wk", attn.wk.data());
      write_values(out, "wv", attn.wv.data());
      out << "gamma " << format_double(attn.gamma) << '\n';
    }
  }
  atomic_write_file(path, out.str());
}

Network load_network(const std::string& path) {
  const std::string text = read_file(path);
  TokenReader r(text, path);
  r.expect("ifolab-net");
  r.expect("v1");
  r.expect("layers");
  const int count = r.integer("layer count");
  if (count < 1 || count > 1024) r.fail("implausible layer count " + std::to_string(count));
  Network net;
  for (int li = 0; li < count; ++li) {
    const std::string kind = r.word("layer kind");
    if (kind == "dense") {
      DenseLayer dense;
      const int in = r.integer("dense in");
      const int out = r.integer("dense out");
      if (in < 1 || out < 1) r.fail("bad dense shape");
      const std::string act = r.word("activation");
      if (act == "tanh") dense.act = Activation::tanh;
      else if (act == "identity") dense.act = Activation::identity;
      else r.fail("unknown activation '" + act + "'");
      dense.weight = Matrix(in, out);
      dense.bias.assign(out, 0.0);
      r.read_values("weight", dense.weight.data());
      r.read_values("bias", dense.bias);
      net.layers.emplace_back(std::move(dense));
    } else if (kind == "attention") {
      SelfAttentionLayer attn;
      attn.tokens = r.integer("attention tokens");
      const int d = r.integer("attention dim");
      if (attn.tokens < 1 || d < 1) r.fail("bad attention shape");
      attn.wq = Matrix(d, d);
      attn.wk = Matrix(d, d);
      attn.wv = Matrix(d, d);
      r.read_values("wq", attn.wq.data());
      r.read_values("wk", attn.wk.data());
      r.read_values("wv", attn.wv.data());
      r.expect("gamma");
      attn.gamma = r.real("gamma");
      net.layers.emplace_back(std::move(attn));
    } else {
      r.fail("unknown layer kind '" + kind + "'");
    }
  }
  validate(net);
  return net;
}

}  // namespace ifolab::nn
