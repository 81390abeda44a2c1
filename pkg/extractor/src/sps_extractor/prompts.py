"""Prompt templates used by the extraction jobs."""

COMPRESSOR_PROMPT = """Instruct
1. Generate a summary of source documents to answer the question. Ensure the summary is under 200 words and does not include any pronouns. DO NOT make assumptions or attempt to answer the question; your job is to summarise only.
2. Evaluate the summary based solely on the information of it, without any additional background context.

Question: {question}

Source documents: {document_input}

Summary:"""

READER_PROMPT = """Write a high-quality answer for the given question using only the provided search results (some of which might be irrelevant).

Question: {question}

Search results: {summary}

Answer:"""


def compressor_prompt(question: str, documents: list[str]) -> str:
    return COMPRESSOR_PROMPT.format(
        question=question, document_input="\n\n".join(documents)
    )


def fusion_text(question: str, summary: str) -> str:
    """Summary-query text whose embedding the probe is appended to."""
    return f"{question}\n{summary}"
