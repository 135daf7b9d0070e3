/*
 * Copyright 2026 The rankforge Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "rankforge/checkpoint.h"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include "rankforge/errors.h"

namespace rankforge {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

void write_tensor(std::ostream& out, std::size_t layer, const char* name,
                  std::span<const double> values) {
  out << "tensor " << layer << ' ' << name << ' ' << values.size() << '\n';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << ' ';
    out << format_double(values[i]);
  }
  out << '\n';
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::string next(const char* expecting) {
    std::string line;
    if (!std::getline(in_, line)) {
      throw ParseError(std::string("checkpoint truncated, expected ") +
                           expecting,
                       line_no_ + 1);
    }
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  std::size_t line_no() const { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

std::size_t parse_count(const std::string& tok, std::size_t line) {
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(tok.c_str(), &end, 10);
  if (tok.empty() || *end != '\0' || errno != 0 || tok[0] == '-') {
    throw ParseError("bad count '" + tok + "'", line);
  }
  return static_cast<std::size_t>(v);
}

std::vector<double> parse_values(const std::string& text, std::size_t count,
                                 std::size_t line) {
  std::vector<double> out;
  out.reserve(count);
  std::istringstream ss(text);
  std::string tok;
  while (ss >> tok) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (*end != '\0' || !std::isfinite(v)) {
      throw ParseError("bad value '" + tok + "'", line);
    }
    out.push_back(v);
  }
  if (out.size() != count) {
    throw ParseError("expected " + std::to_string(count) + " values, got " +
                         std::to_string(out.size()),
                     line);
  }
  return out;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Network& net,
                      const std::map<std::string, std::string>& meta) {
  out << kCheckpointMagic << '\n';
  out << "arch "
      << (net.architecture() ? std::string(to_string(*net.architecture()))
                             : std::string("custom"))
      << '\n';
  for (const auto& [k, v] : meta) out << "meta " << k << ' ' << v << '\n';
  out << "layers " << net.layers().size() << '\n';
  for (const auto& spec : net.layers()) {
    out << "layer " << spec.in_dim << ' ' << spec.out_dim << ' '
        << to_string(spec.activation) << ' ' << (spec.batchnorm ? 1 : 0)
        << '\n';
  }
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    const auto& p = net.params()[i];
    write_tensor(out, i, "weight", p.weight.values());
    write_tensor(out, i, "bias", p.bias);
    if (net.layers()[i].batchnorm) {
      write_tensor(out, i, "gamma", p.gamma);
      write_tensor(out, i, "beta", p.beta);
      write_tensor(out, i, "mean", net.running_stats()[i].mean);
      write_tensor(out, i, "var", net.running_stats()[i].var);
    }
  }
  out << "end\n";
}

Checkpoint read_checkpoint(std::istream& in) {
  LineReader reader(in);
  if (reader.next("header") != kCheckpointMagic) {
    throw ParseError("not a rankforge v1 checkpoint", 1);
  }

  std::optional<Architecture> arch;
  {
    std::istringstream ss(reader.next("arch line"));
    std::string key, code;
    ss >> key >> code;
    if (key != "arch" || code.empty()) {
      throw ParseError("expected 'arch <code>'", reader.line_no());
    }
    if (code != "custom") {
      try {
        arch = parse_architecture(code);
      } catch (const ConfigError& e) {
        throw ParseError(e.what(), reader.line_no());
      }
    }
  }

  std::map<std::string, std::string> meta;
  std::string line = reader.next("layers line");
  while (line.rfind("meta ", 0) == 0) {
    std::istringstream ss(line.substr(5));
    std::string key, value;
    ss >> key;
    std::getline(ss >> std::ws, value);
    if (key.empty()) throw ParseError("empty meta key", reader.line_no());
    meta[key] = value;
    line = reader.next("layers line");
  }

  std::size_t n_layers = 0;
  {
    std::istringstream ss(line);
    std::string key, count;
    ss >> key >> count;
    if (key != "layers") {
      throw ParseError("expected 'layers <n>'", reader.line_no());
    }
    n_layers = parse_count(count, reader.line_no());
    if (n_layers == 0) throw ParseError("zero layers", reader.line_no());
  }

  std::vector<LayerSpec> specs;
  for (std::size_t i = 0; i < n_layers; ++i) {
    std::istringstream ss(reader.next("layer line"));
    std::string key, in_dim, out_dim, act, bn;
    ss >> key >> in_dim >> out_dim >> act >> bn;
    if (key != "layer" || (bn != "0" && bn != "1")) {
      throw ParseError("expected 'layer <in> <out> <act> <0|1>'",
                       reader.line_no());
    }
    LayerSpec spec;
    spec.in_dim = parse_count(in_dim, reader.line_no());
    spec.out_dim = parse_count(out_dim, reader.line_no());
    try {
      spec.activation = parse_activation(act);
    } catch (const ConfigError& e) {
      throw ParseError(e.what(), reader.line_no());
    }
    spec.batchnorm = bn == "1";
    specs.push_back(spec);
  }

  ParamSet params(n_layers);
  std::vector<BatchNormStats> running(n_layers);
  for (std::size_t i = 0; i < n_layers; ++i) {
    std::vector<const char*> names = {"weight", "bias"};
    if (specs[i].batchnorm) {
      names.insert(names.end(), {"gamma", "beta", "mean", "var"});
    }
    for (const char* name : names) {
      std::istringstream ss(reader.next("tensor header"));
      const std::size_t header_line = reader.line_no();
      std::string key, layer, tname, count;
      ss >> key >> layer >> tname >> count;
      if (key != "tensor" || parse_count(layer, header_line) != i ||
          tname != name) {
        throw ParseError("expected 'tensor " + std::to_string(i) + " " +
                             name + " <count>'",
                         header_line);
      }
      const std::size_t n = parse_count(count, header_line);
      auto values = parse_values(reader.next("tensor values"), n,
                                 reader.line_no());
      const std::string t = name;
      if (t == "weight") {
        if (n != specs[i].in_dim * specs[i].out_dim) {
          throw ParseError("weight size does not match layer dims",
                           header_line);
        }
        params[i].weight =
            DenseMatrix(specs[i].out_dim, specs[i].in_dim, std::move(values));
      } else if (t == "bias") {
        params[i].bias = std::move(values);
      } else if (t == "gamma") {
        params[i].gamma = std::move(values);
      } else if (t == "beta") {
        params[i].beta = std::move(values);
      } else if (t == "mean") {
        running[i].mean = std::move(values);
      } else {
        running[i].var = std::move(values);
      }
    }
  }
  if (reader.next("end") != "end") {
    throw ParseError("expected 'end'", reader.line_no());
  }

  try {
    return Checkpoint{
        Network(std::move(specs), std::move(params), std::move(running), arch),
        std::move(meta)};
  } catch (const InputError& e) {
    throw ParseError(std::string("inconsistent checkpoint: ") + e.what(), 0);
  }
}

void save_checkpoint(const std::filesystem::path& path, const Network& net,
                     const std::map<std::string, std::string>& meta) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write checkpoint " + path.string());
  write_checkpoint(out, net, meta);
  if (!out) throw InputError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace rankforge
