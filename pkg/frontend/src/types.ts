import { z } from "zod";

/** Wire payloads of the annotation service, validated at the boundary so a
 * misbehaving server fails loudly instead of corrupting UI state. */

export const StatusSchema = z.object({
  round: z.number().int().min(1),
  labeled: z.number().int().min(0),
  unlabeled: z.number().int().min(0),
  last_f1: z.number().min(0).max(1).nullable(),
});
export type SessionStatus = z.infer<typeof StatusSchema>;

export const QueryTokenSchema = z.object({
  surface: z.string().min(1),
  suggestion: z.string().min(1),
  marginals: z.array(z.number()),
});
export type QueryToken = z.infer<typeof QueryTokenSchema>;

export const QuerySchema = z.object({
  sentence_id: z.string().min(1),
  tokens: z.array(QueryTokenSchema).min(1),
  utility: z.number(),
  labels: z.array(z.string().min(1)).min(1),
});
export type SessionQuery = z.infer<typeof QuerySchema>;

export const LabelResponseSchema = z.object({
  accepted: z.boolean(),
  round: z.number().int(),
  duplicate: z.boolean().optional(),
});
export type LabelResponse = z.infer<typeof LabelResponseSchema>;

export const RetrainResponseSchema = z.object({
  round: z.number().int(),
});
export type RetrainResponse = z.infer<typeof RetrainResponseSchema>;
