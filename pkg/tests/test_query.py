from __future__ import annotations

import pytest

from litpipe.errors import EmptyAbstract
from litpipe.query import QuerySpec, clean_llm_query, merge_user_keywords, summarize_abstract_to_query

from .conftest import scripted_gateway


class TestSummarize:
    def test_clean_pass_through(self):
        gateway = scripted_gateway("Multimodal Research: Image-Text Model Interaction")
        query = summarize_abstract_to_query(gateway, "Some abstract.", model_name="gpt-4")
        assert query == "Multimodal Research: Image-Text Model Interaction"

    def test_empty_abstract(self):
        with pytest.raises(EmptyAbstract):
            summarize_abstract_to_query(scripted_gateway(), "   ", model_name="gpt-4")

    def test_prefix_and_quotes_stripped(self):
        gateway = scripted_gateway('Keywords: "graph rewriting compilers"')
        query = summarize_abstract_to_query(gateway, "An abstract.", model_name="gpt-4")
        assert query == "graph rewriting compilers"

    def test_single_line_and_word_cap(self):
        gateway = scripted_gateway("Query:\n" + " ".join(f"word{i}" for i in range(30)))
        query = summarize_abstract_to_query(gateway, "An abstract.", model_name="gpt-4", max_words=12)
        assert "\n" not in query
        assert len(query.split()) == 12

    def test_uses_template_metadata_for_cassette_key(self):
        gateway = scripted_gateway("anything")
        summarize_abstract_to_query(gateway, "An abstract.", model_name="gpt-4")
        request = gateway.audit_log[0].request
        assert request.template_id == "summarize"
        assert request.template_version == "v1"
        assert request.temperature == 0.0


class TestCleanLlmQuery:
    def test_never_exceeds_word_cap(self):
        for raw in ("a b c d e f g h i j k l m n", "one\ntwo\nthree", '"quoted thing"'):
            cleaned = clean_llm_query(raw, max_words=3)
            assert len(cleaned.split()) <= 3
            assert "\n" not in cleaned

    def test_inner_colon_kept(self):
        assert clean_llm_query("Topic: With Colon") == "Topic: With Colon"


class TestMergeUserKeywords:
    def test_appends_new_keywords(self):
        assert merge_user_keywords("image-text models", ["diffusion"]) == "image-text models diffusion"

    def test_case_insensitive_dedup(self):
        assert merge_user_keywords("rag pipelines", ["RAG pipelines"]) == "rag pipelines"

    def test_empty_base(self):
        assert merge_user_keywords("", ["a", "b"]) == "a b"

    def test_idempotent(self):
        keywords = ["alpha", "Beta", "alpha"]
        once = merge_user_keywords("base", keywords)
        assert merge_user_keywords(once, keywords) == once

    def test_order_preserved(self):
        assert merge_user_keywords("q", ["z", "a"]) == "q z a"


class TestQuerySpec:
    def test_requires_some_input(self):
        with pytest.raises(ValueError):
            QuerySpec().validate()

    def test_keywords_only_is_fine(self):
        QuerySpec(user_keywords=["a"]).validate()

    def test_round_trip(self):
        spec = QuerySpec("abs", ["k"], ["1234.56789"], synthesized_query="q")
        assert QuerySpec.from_dict(spec.to_dict()) == spec
