#include "sqa/prompts.hpp"

#include "sqa/error.hpp"
#include "sqa/rng.hpp"

namespace sqa {

std::string build_part1_prompt(const std::string& document) {
    if (document.empty()) throw InputError("build_part1_prompt: empty document");
    return document +
           "\nGenerate a question-answer pair based on the above information only. "
           "Do not use any other knowledge outside of this text. "
           "The question and answer need to be complete sentences.";
}

std::string build_part2_prompt(const std::string& document) {
    if (document.empty()) throw InputError("build_part2_prompt: empty document");
    return document +
           "\nGenerate a question along with 4 options and give a corresponding answer and "
           "analysis based on the above information only. Do not use any other knowledge "
           "outside of this text.\n"
           "Your answer needs to use the following format, and the parts in <> are what you "
           "need to fill in:\n"
           "Question: <>\n"
           "Options:\n"
           "A. <>\n"
           "B. <>\n"
           "C. <>\n"
           "D. <>\n"
           "Answer and analysis: The answer is Option <> because Option A <>, Option B <>, "
           "Option C <>, Option D <>";
}

const std::vector<std::string>& asr_prompt_templates() {
    static const std::vector<std::string> templates = {
        "Transcribe this speech segment into text.",
        "Write down exactly what is said in the speech.",
        "Please transcribe the spoken content.",
        "Convert this speech into written text.",
        "What words are spoken in this recording?",
        "Provide a transcript of the speech.",
        "Write out the speech word for word.",
        "Turn the spoken words into text.",
        "Give the exact transcription of this speech.",
        "Type out what the speaker says.",
        "Produce a verbatim transcript of the audio.",
        "What does the speaker say? Write it down.",
        "Render the speech as plain text.",
        "Transcribe the recording.",
        "Write the spoken sentence as text.",
        "Put the speech into writing.",
        "Spell out the content of the speech.",
        "Transcribe every word of the speech.",
        "What is being said in this speech segment?",
        "Write a faithful transcript of the spoken words.",
        "Take down the speech verbatim.",
        "Convert the audio content to text.",
        "Write exactly what you hear in the speech.",
        "Give a word-for-word transcription.",
        "Transcribe the utterance.",
        "Note down the words of the speaker.",
        "Please write out the speech.",
        "Produce the text corresponding to this speech.",
        "What was spoken? Provide the text.",
        "Reproduce the speech in written form.",
        "Transcribe the spoken passage.",
        "Turn this audio into its transcript.",
        "Write the words uttered in the speech.",
        "Deliver a transcript of the utterance.",
        "Give the written form of this speech.",
        "Record the speech as text.",
        "Please provide the transcription.",
        "List the words spoken in order.",
        "Write down the sentence that was spoken.",
        "Transcribe what the voice says.",
        "Translate the speech into written words.",
        "Capture the speech in text form.",
        "Provide the verbatim text of the recording.",
        "Copy the spoken words into text.",
        "What sentence does the speaker say?",
        "Type the contents of the speech.",
        "Write the transcript for this segment.",
        "Give me the text of the speech.",
        "State the exact words of the speaker.",
        "Transform the speech into a transcript.",
        "Please write what the speaker said.",
        "Set down the speech in writing.",
        "Report the spoken words exactly.",
        "Transcribe the speech sample.",
        "Write out the audio as text.",
        "Provide an exact written copy of the speech.",
        "What text matches this speech?",
        "Write the speech content verbatim.",
        "Produce the transcript of the spoken input.",
        "Turn the utterance into text.",
        "Give the transcription of the spoken sentence.",
        "Write every spoken word down.",
        "Transcribe the voice recording.",
        "Provide text for the spoken segment.",
        "Write the exact wording of the speech.",
        "Put the spoken sentence on paper.",
        "What are the speaker's words? Transcribe them.",
        "Express the speech as written text.",
        "Write a transcript capturing each word.",
        "Transcribe the audio faithfully.",
        "Give a complete transcription of the speech.",
        "Take the speech down word by word.",
        "Write the text form of this utterance.",
        "Spell out the spoken words.",
        "Convert the spoken sentence to text.",
        "Provide the full transcript.",
        "Transcribe the speaker's sentence.",
        "Write the recording out as text.",
        "Give the verbatim wording of the speech.",
        "Type what is said in the segment.",
        "Transcribe the spoken material.",
        "Write down each word of the utterance.",
        "Produce written text for the speech.",
        "What does this recording say? Write it out.",
        "Give the speech in text form.",
        "Write out the spoken passage exactly.",
        "Transcribe the words in the audio.",
        "Provide a clean transcript of the speech.",
        "Write the speech down in full.",
        "Put the recording into words.",
        "Transcribe this utterance into text.",
        "Write the literal text of the speech.",
        "Give an accurate transcript of the spoken words.",
        "Type the sentence said by the speaker.",
        "Transcribe the spoken sentence exactly.",
        "Write what the audio contains.",
        "Provide the speech as readable text.",
        "Set the spoken words down in text.",
        "Write the entire speech as text.",
        "Transcribe the segment word for word.",
    };
    return templates;
}

std::vector<SqaRecord> reformulate_asr(
    const std::vector<std::pair<std::string, std::string>>& transcripts, std::uint64_t seed) {
    const auto& templates = asr_prompt_templates();
    Rng rng(seed);
    std::vector<SqaRecord> records;
    records.reserve(transcripts.size());
    std::size_t index = 0;
    for (const auto& [speech_path, text] : transcripts) {
        const std::size_t template_id = rng.uniform_index(templates.size());
        ++index;
        if (text.empty()) continue;  // skipped with warning at the CLI layer
        SqaRecord r;
        r.id = "asr-" + std::to_string(index - 1);
        r.task = TaskKind::asr;
        r.speech_path = speech_path;
        r.document = text;
        r.question = templates[template_id];
        r.answer = text;
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace sqa
