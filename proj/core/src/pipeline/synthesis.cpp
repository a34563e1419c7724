#include "styleforge/pipeline/synthesis.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <fmt/format.h>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

namespace styleforge::pipeline {

namespace {

struct JobResult {
  std::optional<Record> record;
  std::optional<SynthesisFailure> failure;
  std::exception_ptr error;
};

}  // namespace

std::string synthetic_id(std::size_t index) { return fmt::format("syn_{:05d}", index); }

SynthesisBatch run_synthesis_batch(const PairPlan& plan, const DatasetManifest& real, const std::filesystem::path& root,
                                   const featnet::WeightBundle& net, const nst::StyleTransferConfig& config,
                                   const SynthesisOptions& options) {
  SynthesisBatch batch;
  if (plan.empty()) return batch;
  config.validate(net.spec);
  if (options.parallelism < 1) throw InvalidArgument("synthesis parallelism must be at least 1");

  std::map<std::string, Image, std::less<>> images;
  for (const auto& e : plan.entries) {
    for (const auto* id : {&e.content_id, &e.style_id}) {
      if (images.contains(*id)) continue;
      const Record& r = real.at(*id);
      if (r.source != Source::Real) throw InvalidArgument("plan id '" + *id + "' is not a real image");
      images.emplace(*id, read_png(root / r.path));
    }
  }

  const auto out_dir = root / options.subdir;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  const std::string digest = config.digest();
  auto run_job = [&](std::size_t index) {
    JobResult res;
    const PairEntry& e = plan.entries[index];
    try {
      const auto result = nst::synthesize(images.at(e.content_id), images.at(e.style_id), net, config, e.seed,
                                          e.content_id, e.style_id);
      const std::string id = synthetic_id(index);
      const std::string rel = options.subdir + "/" + id + ".png";
      auto text = options.text;
      text.push_back({"id", id});
      text.push_back({"content_id", e.content_id});
      text.push_back({"style_id", e.style_id});
      text.push_back({"seed", std::to_string(e.seed)});
      text.push_back({"nst_digest", digest});
      write_png(root / rel, result.image, text);
      Record r;
      r.id = id;
      r.path = rel;
      r.source = Source::Synthetic;
      r.provenance = SourcePair{e.content_id, e.style_id, e.seed};
      res.record = std::move(r);
    } catch (const nst::NonFiniteLoss& err) {
      res.failure = SynthesisFailure{index, e.content_id, e.style_id, err.what()};
    } catch (...) {
      res.error = std::current_exception();
    }
    return res;
  };

  const std::size_t total = plan.size();
  std::vector<std::optional<JobResult>> results(total);
  std::mutex mutex;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= total || stop.load()) return;
      auto res = run_job(i);
      {
        std::lock_guard lock(mutex);
        results[i] = std::move(res);
      }
      ready.notify_all();
    }
  };

  const std::size_t workers = std::min(options.parallelism, total);
  std::vector<std::jthread> pool;
  if (workers > 1) {
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
  }

  // The single collector emits results strictly in plan order.
  const std::size_t max_failures = total / 10;
  std::exception_ptr error;
  for (std::size_t i = 0; i < total; ++i) {
    JobResult res;
    if (workers > 1) {
      std::unique_lock lock(mutex);
      ready.wait(lock, [&] { return results[i].has_value(); });
      res = std::move(*results[i]);
    } else {
      res = run_job(i);
    }
    if (res.error) {
      error = res.error;
      break;
    }
    if (res.failure) {
      batch.failures.push_back(std::move(*res.failure));
      if (batch.failures.size() > max_failures) {
        error = std::make_exception_ptr(SynthesisAborted(
            fmt::format("synthesis aborted: {} of {} entries failed (limit {}); last: {}", batch.failures.size(), total,
                        max_failures, batch.failures.back().message)));
        break;
      }
    } else {
      batch.records.push_back(std::move(*res.record));
    }
    if (options.progress) options.progress(i + 1, total);
  }
  if (error) {
    stop = true;
    pool.clear();
    std::rethrow_exception(error);
  }
  return batch;
}

}  // namespace styleforge::pipeline
