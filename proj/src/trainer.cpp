// Copyright 2026 The compgen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "compgen/trainer.hpp"

#include <cmath>
#include <fstream>

#include "compgen/error.hpp"
#include "compgen/io_util.hpp"
#include "compgen/random.hpp"

namespace compgen {

torch::Tensor StoreImageSource::fetch(std::span<const std::int64_t> ids) {
  const auto b = static_cast<std::int64_t>(ids.size());
  auto out = torch::empty({b, store_.height(), store_.width(), store_.channels()}, torch::kUInt8);
  auto* dst = out.data_ptr<std::uint8_t>();
  const auto bytes = store_.image_bytes();
  for (std::int64_t i = 0; i < b; ++i) {
    const auto img = store_.image(store_.row_of(ids[static_cast<std::size_t>(i)]));
    std::copy(img.begin(), img.end(), dst + i * bytes);
    fetched_.insert(ids[static_cast<std::size_t>(i)]);
  }
  fetch_count_ += b;
  return out.permute({0, 3, 1, 2}).to(torch::kFloat32).div_(255.0).contiguous();
}

nlohmann::json TrainConfig::to_json() const {
  return {{"steps", steps},
          {"batch_size", batch_size},
          {"learning_rate", learning_rate},
          {"optimizer", "adam"},
          {"seed", seed},
          {"checkpoint_every", checkpoint_every},
          {"loss_log_every", loss_log_every}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.steps = j.value("steps", c.steps);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.seed = j.value("seed", c.seed);
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  c.loss_log_every = j.value("loss_log_every", c.loss_log_every);
  require(j.value("optimizer", std::string("adam")) == "adam", ErrorCode::kConfig,
          "only the adam optimizer is supported");
  require(c.steps >= 1, ErrorCode::kConfig, "steps must be >= 1");
  require(c.batch_size >= 2, ErrorCode::kConfig, "batch_size must be >= 2");
  require(c.learning_rate > 0.0, ErrorCode::kConfig, "learning_rate must be > 0");
  require(c.loss_log_every >= 1, ErrorCode::kConfig, "loss_log_every must be >= 1");
  return c;
}

BatchSampler::BatchSampler(std::span<const std::int64_t> train_ids, std::uint64_t seed)
    : ids_(train_ids.begin(), train_ids.end()), rng_(mix_seed(seed, 0xba7c)) {
  require(!ids_.empty(), ErrorCode::kInvalidArgument, "batch sampler needs train ids");
}

std::vector<std::int64_t> BatchSampler::next(int batch_size) {
  std::vector<std::int64_t> out(static_cast<std::size_t>(batch_size));
  for (auto& id : out) id = ids_[static_cast<std::size_t>(rng_.uniform_index(ids_.size()))];
  return out;
}

TrainResult train(const ModelConfig& config, std::span<const std::int64_t> train_ids,
                  ImageSource& source, const TrainConfig& tc, const std::filesystem::path& out_dir) {
  require(tc.steps >= 1 && tc.batch_size >= 2, ErrorCode::kConfig, "invalid train config");
  TrainResult result;
  result.model = make_model(config, mix_seed(tc.seed, 0x1417));
  auto& model = *result.model;
  if (model.config().family == ModelFamily::kBetaTcvae && model.config().vae.dataset_size == 0) {
    model.set_dataset_size(static_cast<std::int64_t>(train_ids.size()));
  }
  torch::optim::Adam optimizer(
      model.module().parameters(),
      torch::optim::AdamOptions(tc.learning_rate).betas({0.9, 0.999}).eps(1e-8));
  BatchSampler sampler(train_ids, tc.seed);

  std::ofstream csv;
  std::vector<std::string> columns;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    csv.open(out_dir / "loss.csv");
    require(static_cast<bool>(csv), ErrorCode::kIo, "cannot write " + (out_dir / "loss.csv").string());
  }

  model.module().train();
  for (std::int64_t step = 0; step < tc.steps; ++step) {
    const auto ids = sampler.next(tc.batch_size);
    const auto x = source.fetch(ids);
    auto out = model.loss(x, mix_seed(tc.seed, static_cast<std::uint64_t>(step) + 1));
    const bool finite = std::all_of(out.terms.begin(), out.terms.end(),
                                    [](const auto& kv) { return std::isfinite(kv.second); });
    if (!finite) {
      if (!out_dir.empty()) {
        const auto diag = out_dir / "diverged";
        save_checkpoint(model, diag, step, tc.seed);
        write_json(diag / "diagnostic.json",
                   {{"step", step}, {"batch_ids", ids}, {"terms", nlohmann::json(out.terms)}});
      }
      fail(ErrorCode::kDiverged, "non-finite loss at step " + std::to_string(step));
    }
    optimizer.zero_grad();
    out.total.backward();
    optimizer.step();

    if (step % tc.loss_log_every == 0 || step + 1 == tc.steps) {
      auto row = out.terms;
      row["step"] = static_cast<double>(step);
      if (csv.is_open()) {
        if (columns.empty()) {
          columns.push_back("step");
          for (const auto& [k, v] : out.terms) columns.push_back(k);
          for (std::size_t i = 0; i < columns.size(); ++i) csv << (i ? "," : "") << columns[i];
          csv << '\n';
        }
        for (std::size_t i = 0; i < columns.size(); ++i) csv << (i ? "," : "") << format_double(row[columns[i]]);
        csv << '\n';
      }
      result.log.push_back(std::move(row));
    }
    if (!out_dir.empty() && tc.checkpoint_every > 0 && (step + 1) % tc.checkpoint_every == 0 &&
        step + 1 < tc.steps) {
      save_checkpoint(model, out_dir / "checkpoints" / ("step_" + std::to_string(step + 1)), step + 1, tc.seed);
    }
  }
  model.module().eval();
  result.steps = tc.steps;
  if (!out_dir.empty()) {
    csv.flush();
    result.checkpoint = out_dir / "final";
    save_checkpoint(model, result.checkpoint, tc.steps, tc.seed, {{"train", tc.to_json()}});
  }
  return result;
}

}  // namespace compgen
