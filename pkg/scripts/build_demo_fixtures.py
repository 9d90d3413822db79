#!/usr/bin/env python3
"""Build the canonical replay fixture set under fixtures/demo/.

The fixture pins one fully worked example: a multimodal-research
abstract, its summarized search query, four retrieved papers, and the
zero-shot and plan-based drafts. HTTP and LLM exchanges are written as
cassettes by running the actual pipeline with a scripted LLM wrapped in
the recording backend, so every cassette key matches what a replay run
will ask for. Re-run this script whenever prompts or request shapes
change.
"""

from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO_ROOT / "src"))

from litpipe.cassette import CassetteStore, http_request_key
from litpipe.llm import LlmGateway, RecordingBackend, ScriptedBackend
from litpipe.pipeline import Pipeline, PipelineConfig, SessionStore
from litpipe.plan import parse_plan
from litpipe.query import QuerySpec
from litpipe.scholarly import (
    DEFAULT_FIELDS,
    ApiCredentials,
    OpenAlexClient,
    S2_BASE_URL,
    SemanticScholarClient,
)
from litpipe.transport import ReplayTransport

ABSTRACT = (
    "The field of multimodal research focusing on the comprehension and creation of "
    "both images and text has witnessed significant strides. This progress is "
    "exemplified by the emergence of sophisticated models dedicated to image "
    "captioning at scale, such as the notable Flamingo model and text-to-image "
    "generative models, with DALL-E serving as a prominent example. An interesting "
    "question worth exploring in this domain is whether Flamingo and DALL-E "
    "understand each other. To study this question, we propose a reconstruction task "
    "where Flamingo generates a description for a given image and DALL-E uses this "
    "description as input to synthesize a new image. We argue that these models "
    "understand each other if the generated image is similar to the given image. "
    "Specifically, we study the relationship between the quality of the image "
    "reconstruction and that of the text generation. We find that an optimal "
    "description of an image is one that gives rise to a generated image similar to "
    "the original one. The finding motivates us to propose a unified framework to "
    "finetune the text-to-image and image-to-text models. Concretely, the "
    "reconstruction part forms a regularization loss to guide the tuning of the "
    "models. Extensive experiments on multiple datasets with different image "
    "captioning and image generation models validate our findings and demonstrate "
    "the effectiveness of our proposed unified framework. As DALL-E and Flamingo are "
    "not publicly available, we use Stable Diffusion and BLIP in the remaining work. "
    "Project website: https://dalleflamingo.github.io."
)

QUERY = "Multimodal Research: Image-Text Model Interaction"

PAPERS = [
    {
        "paperId": "2f2f0f3f3a1b9a0a6a2a4a8a1c3e5d7f9b1d3e5a",
        "title": "CoCa: Contrastive Captioners are Image-Text Foundation Models",
        "abstract": (
            "Exploring large-scale pretrained foundation models is of significant "
            "interest in computer vision. This work presents Contrastive Captioner, "
            "an image-text encoder-decoder foundation model pretrained jointly with "
            "a contrastive loss and a captioning loss, subsuming the capabilities of "
            "contrastive dual-encoder approaches and generative captioning methods. "
            "The single model achieves strong transfer across visual recognition, "
            "crossmodal retrieval, multimodal understanding, and image captioning."
        ),
        "year": 2022,
        "citationCount": 702,
        "externalIds": {"ArXiv": "2205.01917", "DOI": "10.48550/arXiv.2205.01917"},
        "url": "https://www.semanticscholar.org/paper/coca",
        "authors": [
            {"authorId": "a1", "name": "Jiahui Yu"},
            {"authorId": "a2", "name": "Zirui Wang"},
        ],
    },
    {
        "paperId": "5b5c7d9e1f3a5b7c9d1e3f5a7b9c1d3e5f7a9b1c",
        "title": (
            "MAMO: Fine-Grained Vision-Language Representations Learning with Masked "
            "Multimodal Modeling"
        ),
        "abstract": (
            "Multimodal representation learning has shown promising improvements on "
            "various vision-language tasks, yet most existing methods excel at "
            "coarse-grained instance-level alignment while ignoring finer-grained "
            "interactions. This work proposes a jointly masked multimodal modeling "
            "method that performs joint masking on image-text input and integrates "
            "both implicit and explicit targets for the masked signals to recover, "
            "learning fine-grained multimodal representations."
        ),
        "year": 2022,
        "citationCount": 0,
        "externalIds": {"ArXiv": "2210.04183", "DOI": "10.1145/3539618.3591721"},
        "url": "https://www.semanticscholar.org/paper/mamo",
        "authors": [{"authorId": "a3", "name": "Zijia Zhao"}],
    },
    {
        "paperId": "7c9d1e3f5a7b9c1d3e5f7a9b1c3d5e7f9a1b3c5d",
        "title": "Dynamic Modality Interaction Modeling for Image-Text Retrieval",
        "abstract": (
            "Image-text retrieval requires bridging heterogeneous modalities, and "
            "existing approaches hand-craft a fixed interaction pattern from expert "
            "experience. This work presents a novel modality interaction modeling "
            "network based on the routing mechanism, the first unified and dynamic "
            "multimodal interaction framework for image-text retrieval, which learns "
            "different activated interaction paths for different data."
        ),
        "year": 2021,
        "citationCount": 88,
        "externalIds": {"DOI": "10.1145/3404835.3462829"},
        "url": "https://www.semanticscholar.org/paper/dmim",
        "authors": [{"authorId": "a4", "name": "Leigang Qu"}],
    },
    {
        "paperId": "9a1b3c5d7e9f1a3b5c7d9e1f3a5b7c9d1e3f5a7b",
        "title": (
            "WIT: Wikipedia-based Image Text Dataset for Multimodal Multilingual "
            "Machine Learning"
        ),
        "abstract": (
            "The milestone improvements brought about by deep representation "
            "learning depend on large curated datasets. This work introduces the "
            "Wikipedia-based Image Text Dataset, a large multimodal multilingual "
            "dataset of image-text examples across many languages, created by a "
            "rigorous filtering of Wikipedia pages, offering a more diverse set of "
            "concepts and real-world entities for pretraining multimodal models."
        ),
        "year": 2021,
        "citationCount": 185,
        "externalIds": {"ArXiv": "2103.01913", "DOI": "10.1145/3404835.3463257"},
        "url": "https://www.semanticscholar.org/paper/wit",
        "authors": [{"authorId": "a5", "name": "Krishna Srinivasan"}],
    },
]

ZERO_SHOT_DRAFT = (
    "The field of multimodal research has seen significant advancements in recent "
    "years, with the development of models such as Flamingo and DALL-E that focus on "
    "image captioning and text-to-image generation respectively. However, the "
    "question of whether these models can understand each other and work in harmony "
    "is a topic of interest. In this context, the work of [1] presents the "
    "Contrastive Captioner (CoCa), a model that combines contrastive loss and "
    "captioning loss to pretrain an image-text encoder-decoder foundation model. "
    "This model, while efficient, does not fully address the interaction between "
    "image and text modalities at a fine-grained level.\n"
    "\n"
    "The work of [2] addresses this gap by proposing a jointly masked multimodal "
    "modeling method that focuses on fine-grained multimodal representations. This "
    "method performs joint masking on image-text input and integrates both implicit "
    "and explicit targets for the masked signals to recover. However, this approach, "
    "while effective, does not fully address the challenges of intra-modal reasoning "
    "and cross-modal alignment that are inherent in image-text retrieval.\n"
    "\n"
    "The work of [3] presents a novel modality interaction modeling network based on "
    "the routing mechanism, which is the first unified and dynamic multimodal "
    "interaction framework towards image-text retrieval. This model can dynamically "
    "learn different activated paths for different data, providing a more flexible "
    "approach to modality interaction. However, the design of interaction patterns "
    "in this model still relies heavily on expert experience and empirical feedback, "
    "which may limit its applicability in different contexts.\n"
    "The work of [4] introduces the Wikipedia-based Image Text (WIT) Dataset, a "
    "large-scale dataset for multimodal, multilingual learning. This dataset, while "
    "providing a rich resource for multimodal learning, does not directly address "
    "the question of how different models can understand each other and work "
    "together.\n"
    "\n"
    "In light of these previous works, our study proposes a reconstruction task "
    "where Flamingo generates a description for a given image and DALL-E uses this "
    "description as input to synthesize a new image. We argue that these models "
    "understand each other if the generated image is similar to the given image. "
    "This approach allows us to study the relationship between the quality of the "
    "image reconstruction and that of the text generation, and to propose a unified "
    "framework to finetune the text-to-image and image-to-text models. Our extensive "
    "experiments validate our findings and demonstrate the effectiveness of our "
    "proposed unified framework."
)

PLAN_TEXT = (
    "Please generate 5 sentences in 200 words. Cite [1] on line 2. "
    "Cite [2], [3] on line 3. Cite [4] on line 5."
)

PLAN_DRAFT = (
    "The field of multimodal research has seen significant advancements in the "
    "comprehension and creation of both images and text, with models like Flamingo "
    "and DALL-E leading the way. In a similar vein, the Contrastive Captioner (CoCa) "
    "model presented in [1] pretrains an image-text encoder-decoder foundation model "
    "with contrastive loss and captioning loss, achieving state-of-the-art "
    "performance on a broad range of downstream tasks. Other works have also focused "
    "on improving the fine-grained image-text interaction, with [2] proposing a "
    "jointly masked multimodal modeling method and [3] developing a dynamic "
    "multimodal interaction framework for image-text retrieval. These models, while "
    "effective, often rely on expert experience and empirical feedback, which may "
    "limit their flexibility. The introduction of the Wikipedia-based Image Text "
    "(WIT) Dataset in [4] provides a large, multilingual dataset for pretraining "
    "multimodal models, offering a more diverse set of concepts and real-world "
    "entities for model training. This diversity and scale could potentially enhance "
    "the performance of models like Flamingo and DALL-E, further advancing the field "
    "of multimodal research."
)

PERMUTATION_RESPONSE = "[1] > [2] > [3] > [4]"

CONFIG_OVERRIDES = {"sources": ["S2"], "per_source_limit": 4, "top_k": 4}


def write_search_cassette(store: CassetteStore) -> None:
    params = {"query": QUERY, "limit": 4, "fields": ",".join(DEFAULT_FIELDS)}
    url = f"{S2_BASE_URL}/graph/v1/paper/search"
    key = http_request_key("GET", url, params, None)
    store.put(
        key,
        request={"method": "GET", "url": url, "body": None, "params": params},
        response={
            "status": 200,
            "headers": {"Content-Type": "application/json"},
            "body": {"total": 4, "offset": 0, "data": PAPERS},
        },
    )


def record_pipeline_runs(fixture_dir: Path) -> None:
    store = CassetteStore(fixture_dir)
    transport = ReplayTransport(store)
    credentials = ApiCredentials()
    config = PipelineConfig().with_overrides(CONFIG_OVERRIDES)
    with tempfile.TemporaryDirectory() as tmp:
        for responses, plan_text in (
            ([QUERY, PERMUTATION_RESPONSE, ZERO_SHOT_DRAFT], None),
            ([QUERY, PERMUTATION_RESPONSE, PLAN_DRAFT], PLAN_TEXT),
        ):
            gateway = LlmGateway(RecordingBackend(ScriptedBackend(responses), store))
            pipeline = Pipeline(
                gateway,
                SemanticScholarClient(credentials, transport=transport),
                OpenAlexClient(credentials, transport=transport),
                SessionStore(tmp),
                config,
            )
            plan = parse_plan(plan_text) if plan_text else None
            session = pipeline.run(QuerySpec(abstract_text=ABSTRACT), plan=plan)
            assert session.search_query == QUERY
            assert [p.title for p in session.candidates] == [p["title"] for p in PAPERS]
            expected_draft = PLAN_DRAFT if plan_text else ZERO_SHOT_DRAFT
            assert session.drafts[-1].text == expected_draft


def main() -> None:
    fixture_dir = REPO_ROOT / "fixtures" / "demo"
    fixture_dir.mkdir(parents=True, exist_ok=True)
    for stale in fixture_dir.glob("*.json"):
        stale.unlink()

    write_search_cassette(CassetteStore(fixture_dir))
    record_pipeline_runs(fixture_dir)

    (fixture_dir / "abstract.txt").write_text(ABSTRACT + "\n", encoding="utf-8")
    (fixture_dir / "plan.txt").write_text(PLAN_TEXT + "\n", encoding="utf-8")
    (fixture_dir / "config.json").write_text(
        json.dumps(CONFIG_OVERRIDES, indent=2) + "\n", encoding="utf-8"
    )
    expected = {
        "query": QUERY,
        "titles": [p["title"] for p in PAPERS],
        "citation_counts": [p["citationCount"] for p in PAPERS],
        "years": [p["year"] for p in PAPERS],
        "zero_shot_draft": ZERO_SHOT_DRAFT,
        "plan": PLAN_TEXT,
        "plan_draft": PLAN_DRAFT,
        "citation_sort_order": [1, 4, 3, 2],
    }
    (fixture_dir / "expected.json").write_text(
        json.dumps(expected, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    count = len(list(fixture_dir.glob("*.json")))
    print(f"wrote {count} fixture files into {fixture_dir}")


if __name__ == "__main__":
    main()
